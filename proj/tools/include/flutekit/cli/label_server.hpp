#pragma once

// HTTP service behind the labeling UI:
//   GET  /api/notes              note list with label counts
//   GET  /api/note/{id}/scatter  per-hop points and auto-suggested thresholds
//   GET  /api/labels             stored labels ("[]" before the first PUT)
//   PUT  /api/labels             replace the stored labels (204, or 400)
//   GET  /                       UI assets from ui_dir, or a placeholder page
// Reads run concurrently; writes are serialized and land via temp + rename.

#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "flutekit/cli/pipeline.hpp"

namespace httplib {
class Server;
}

namespace flutekit::cli {

struct LabelServerConfig {
  std::filesystem::path features;
  std::optional<std::filesystem::path> sidecar;
  std::filesystem::path labels;
  std::optional<std::filesystem::path> ui_dir;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class LabelServer {
 public:
  /// Loads the session; throws Error(input) on unreadable inputs.
  explicit LabelServer(const LabelServerConfig& config);
  ~LabelServer();

  LabelServer(const LabelServer&) = delete;
  LabelServer& operator=(const LabelServer&) = delete;

  ApiResponse notes() const;
  ApiResponse scatter(int note_id) const;
  ApiResponse get_labels() const;
  ApiResponse put_labels(std::string_view body);

  /// Binds; port 0 picks a free one. Returns the bound port. Throws
  /// Error(input) when the port is busy.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void run();
  void stop();

 private:
  void install_routes();

  LabelServerConfig config_;
  Sidecar sidecar_;
  FeatureTable table_;
  mutable std::shared_mutex labels_mutex_;
  std::unique_ptr<httplib::Server> http_;
};

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace flutekit::cli
