#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "treeglc/project.hpp"

namespace httplib {
class Server;
}

namespace treeglc {

struct ServiceRoutes;

/// JSON-over-HTTP front of a Project. Error bodies are
/// {"error": {"code", "message", "field"}} with status 400 (malformed
/// request), 404 (unknown id), 409 (version conflict) or 422 (request is
/// well formed but cannot be applied).
class Service {
 public:
  explicit Service(Project& project) : project_(project) {}

  /// Registers every route on s. The service must outlive the server.
  void mount(httplib::Server& s);

  std::size_t cached_scenes() const;
  void drop_cache();

 private:
  Project& project_;
  mutable std::mutex cache_mu_;
  std::map<std::string, std::string> scene_cache_;
  std::vector<std::shared_ptr<ServiceRoutes>> routes_;

  friend struct ServiceRoutes;
};

/// Blocks serving on host:port until the process is stopped.
void serve(Project& project, const std::string& host, int port);

}  // namespace treeglc
