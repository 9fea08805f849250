#include "sandbox/providers/image_prompt.hpp"

namespace sandbox {

std::string CollectingImageSink::submit(const ImagePromptRequest& request) {
  std::lock_guard lock(mutex_);
  requests_.push_back(request);
  return "pending:" + std::to_string(requests_.size());
}

std::vector<ImagePromptRequest> CollectingImageSink::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

}  // namespace sandbox
