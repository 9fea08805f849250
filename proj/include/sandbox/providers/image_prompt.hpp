#pragma once

#include <mutex>
#include <string>
#include <vector>

namespace sandbox {

struct ImagePromptRequest {
  std::string prompt;
  int width = 256;
  int height = 256;
};

/// Destination for portrait and post image prompts. Synthesis itself lives
/// outside this project; a sink returns an opaque reference for the request.
class ImagePromptSink {
 public:
  virtual ~ImagePromptSink() = default;
  virtual std::string submit(const ImagePromptRequest& request) = 0;
};

/// Keeps every request; returns "pending:<n>" references.
class CollectingImageSink : public ImagePromptSink {
 public:
  std::string submit(const ImagePromptRequest& request) override;
  std::vector<ImagePromptRequest> requests() const;

 private:
  mutable std::mutex mutex_;
  std::vector<ImagePromptRequest> requests_;
};

}  // namespace sandbox
