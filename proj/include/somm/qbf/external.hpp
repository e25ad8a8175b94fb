#pragma once

// Hand an emitted instance to an external solver and read its verdict from
// the exit status: 10 means true (sat), 20 means false (unsat), the
// convention SAT and QBF competition solvers follow. Any other status is an
// error. The command is a shell snippet; a `{}` placeholder is replaced
// with the instance path, otherwise the path is appended. Resource limits
// are the command's own business (wrap it in `timeout` if needed).

#include <cstdio>
#include <cstdlib>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "somm/error.hpp"

namespace somm::qbf {

struct ExternalError : Error {
  using Error::Error;
};

inline bool solve_with_external(const std::string& command,
                                const std::string& instance,
                                const std::string& suffix = ".qdimacs") {
  std::string path = "/tmp/somm-XXXXXX" + suffix;
  int fd = ::mkstemps(path.data(), static_cast<int>(suffix.size()));
  if (fd < 0) throw ExternalError("external: cannot create temp file");
  size_t off = 0;
  while (off < instance.size()) {
    ssize_t n = ::write(fd, instance.data() + off, instance.size() - off);
    if (n <= 0) {
      ::close(fd);
      ::unlink(path.c_str());
      throw ExternalError("external: cannot write temp file");
    }
    off += static_cast<size_t>(n);
  }
  ::close(fd);

  std::string cmd = command;
  const size_t hole = cmd.find("{}");
  if (hole != std::string::npos)
    cmd = cmd.substr(0, hole) + path + cmd.substr(hole + 2);
  else
    cmd += " " + path;
  cmd += " >/dev/null 2>&1";

  const int status = std::system(cmd.c_str());
  ::unlink(path.c_str());
  if (status < 0 || !WIFEXITED(status))
    throw ExternalError("external: solver did not exit normally");
  const int code = WEXITSTATUS(status);
  if (code == 10) return true;
  if (code == 20) return false;
  throw ExternalError("external: unexpected solver exit status " +
                      std::to_string(code) + " (want 10=sat, 20=unsat)");
}

}  // namespace somm::qbf
