// Copyright 2026 The permsym Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs the permsym command-line tool in a scratch directory.

#pragma once

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef PERMSYM_CLI_PATH
#error "PERMSYM_CLI_PATH must name the permsym executable"
#endif

namespace permsym::testing {

class CliSandbox {
 public:
  explicit CliSandbox(const std::string& name)
      : dir_(std::filesystem::temp_directory_path() /
             ("permsym_" + name + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  ~CliSandbox() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  CliSandbox(const CliSandbox&) = delete;
  CliSandbox& operator=(const CliSandbox&) = delete;

  std::string path(const std::string& file) const { return (dir_ / file).string(); }

  void write(const std::string& file, const std::string& contents) const {
    std::ofstream(path(file), std::ios::binary) << contents;
  }

  std::string read(const std::string& file) const {
    std::ifstream in(path(file), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  bool exists(const std::string& file) const { return std::filesystem::exists(path(file)); }

  /// Runs `permsym <args>` from inside the sandbox; stdout and stderr are
  /// captured in last_stdout() / last_stderr(). Returns the exit status.
  int run(const std::string& args) {
    const std::string cmd = "cd '" + dir_.string() + "' && '" PERMSYM_CLI_PATH "' " + args +
                            " > .stdout 2> .stderr";
    const int status = std::system(cmd.c_str());
    stdout_ = read(".stdout");
    stderr_ = read(".stderr");
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  const std::string& last_stdout() const { return stdout_; }
  const std::string& last_stderr() const { return stderr_; }

 private:
  std::filesystem::path dir_;
  std::string stdout_;
  std::string stderr_;
};

}  // namespace permsym::testing
