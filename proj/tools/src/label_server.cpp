#include "flutekit/cli/label_server.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <unistd.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <set>

#include "flutekit/error.hpp"
#include "flutekit/ingest.hpp"

namespace flutekit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kPlaceholder = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>flutekit labels</title></head>
<body>
<h1>flutekit label server</h1>
<p>No UI assets were given (start with <code>--ui-dir</code>). The API is live:</p>
<ul>
<li><a href="/api/notes">GET /api/notes</a></li>
<li>GET /api/note/{id}/scatter</li>
<li><a href="/api/labels">GET /api/labels</a>, PUT /api/labels</li>
</ul>
</body></html>
)";

ApiResponse error_response(int status, std::string_view message) {
  return {status, json{{"error", message}}.dump() + "\n"};
}

std::vector<ThresholdLabel> read_stored(const fs::path& path) {
  if (!fs::exists(path)) return {};
  return parse_labels(read_file(path));
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view content) {
  auto tmp = path;
  tmp += fmt::format(".tmp{}", ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_input(fmt::format("cannot write '{}'", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw_input(fmt::format("short write to '{}'", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw_input(fmt::format("cannot replace '{}'", path.string()));
  }
}

LabelServer::LabelServer(const LabelServerConfig& config)
    : config_(config), http_(std::make_unique<httplib::Server>()) {
  sidecar_ = parse_sidecar(read_file(config_.sidecar.value_or(sidecar_path_for(config_.features))));
  table_ = parse_features_csv(read_file(config_.features), sidecar_.grid);
  read_stored(config_.labels);  // fail early on a corrupt file
  // httplib defaults to SO_REUSEPORT, which lets a second server share a busy port.
  http_->set_socket_options([](auto sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  install_routes();
}

LabelServer::~LabelServer() = default;

ApiResponse LabelServer::notes() const {
  std::vector<ThresholdLabel> stored;
  {
    std::shared_lock lock(labels_mutex_);
    stored = read_stored(config_.labels);
  }
  json arr = json::array();
  for (const auto& g : sidecar_.segments) {
    int up = 0, down = 0;
    for (const auto& l : stored)
      if (l.note_id == g.id) ++(l.direction == Direction::up ? up : down);
    arr.push_back({{"id", g.id},
                   {"base_pitch_midi", g.base_pitch_midi},
                   {"repetition", g.repetition},
                   {"start_hop", g.start},
                   {"end_hop", g.end},
                   {"labels", {{"up", up}, {"down", down}}}});
  }
  return {200, arr.dump() + "\n"};
}

ApiResponse LabelServer::scatter(int note_id) const {
  const NoteSegment* seg = nullptr;
  for (const auto& g : sidecar_.segments)
    if (g.id == note_id) seg = &g;
  if (!seg) return error_response(404, fmt::format("no note with id {}", note_id));

  json points = json::array();
  const int n = static_cast<int>(table_.size());
  for (int k = std::max(seg->start, 0); k < seg->end && k < n; ++k) {
    const auto& r = table_.records[static_cast<std::size_t>(k)];
    if (!r.voiced || !r.pitch_midi || !r.pressure_pa || *r.pressure_pa <= 0.0) continue;
    json dir = nullptr;
    for (const auto& w : sidecar_.sweeps)
      if (w.note_id == note_id && w.contains(k)) dir = std::string(to_string(w.direction));
    points.push_back({{"hop", k},
                      {"ln_pressure", std::log(*r.pressure_pa)},
                      {"bend", *r.pitch_midi - seg->base_pitch_midi},
                      {"direction", dir},
                      {"discarded", !r.retained()},
                      {"discard_reason", std::string(to_string(r.discard))}});
  }

  json suggested = json::array();
  for (const auto& l : auto_label_thresholds(sidecar_.events, sidecar_.segments, sidecar_.sweeps))
    if (l.note_id == note_id)
      suggested.push_back(
          {{"direction", std::string(to_string(l.direction))}, {"ln_pressure", l.ln_pressure}});

  json labels = json::array();
  {
    std::shared_lock lock(labels_mutex_);
    for (const auto& l : read_stored(config_.labels))
      if (l.note_id == note_id)
        labels.push_back({{"direction", std::string(to_string(l.direction))},
                          {"ln_pressure", l.ln_pressure},
                          {"source", std::string(to_string(l.source))}});
  }

  const json j = {{"note_id", note_id},
                  {"base_pitch_midi", seg->base_pitch_midi},
                  {"repetition", seg->repetition},
                  {"points", points},
                  {"auto_labels", suggested},
                  {"labels", labels}};
  return {200, j.dump() + "\n"};
}

ApiResponse LabelServer::get_labels() const {
  std::shared_lock lock(labels_mutex_);
  if (!fs::exists(config_.labels)) return {200, "[]\n"};
  return {200, read_file(config_.labels)};
}

ApiResponse LabelServer::put_labels(std::string_view body) {
  std::vector<ThresholdLabel> labels;
  try {
    labels = parse_labels(body);
  } catch (const Error& e) {
    return error_response(400, e.what());
  }
  std::set<int> ids;
  for (const auto& g : sidecar_.segments) ids.insert(g.id);
  std::set<std::pair<int, Direction>> manual;
  for (const auto& l : labels) {
    if (!ids.contains(l.note_id))
      return error_response(400, fmt::format("unknown note_id {}", l.note_id));
    if (l.source == LabelSource::manual && !manual.emplace(l.note_id, l.direction).second)
      return error_response(400, fmt::format("note {} has two manual {} labels", l.note_id,
                                             to_string(l.direction)));
  }
  std::unique_lock lock(labels_mutex_);
  try {
    write_file_atomic(config_.labels, serialize_labels(labels));
  } catch (const Error& e) {
    return error_response(500, e.what());
  }
  return {204, ""};
}

void LabelServer::install_routes() {
  auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    if (!r.body.empty()) res.set_content(r.body, r.content_type);
  };
  http_->Get("/api/notes",
             [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, notes()); });
  http_->Get(R"(/api/note/(-?\d+)/scatter)",
             [this, reply](const httplib::Request& req, httplib::Response& res) {
               int id = 0;
               try {
                 id = std::stoi(req.matches[1].str());
               } catch (const std::exception&) {
                 reply(res, error_response(400, "bad note id"));
                 return;
               }
               reply(res, scatter(id));
             });
  http_->Get("/api/labels", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, get_labels());
  });
  http_->Put("/api/labels", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, put_labels(req.body));
  });
  if (config_.ui_dir) {
    if (!http_->set_mount_point("/", config_.ui_dir->string()))
      throw_input(fmt::format("cannot serve UI from '{}'", config_.ui_dir->string()));
  } else {
    http_->Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(std::string(kPlaceholder), "text/html");
    });
  }
}

int LabelServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? http_->bind_to_any_port(host) : http_->bind_to_port(host, port)
                                                                    ? port
                                                                    : -1;
  if (bound < 0) throw_input(fmt::format("cannot bind {}:{} (port busy?)", host, port));
  return bound;
}

void LabelServer::run() { http_->listen_after_bind(); }

void LabelServer::stop() { http_->stop(); }

}  // namespace flutekit::cli
