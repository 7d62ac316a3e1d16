#pragma once

// Runs the built CLI through the shell and reports its exit status.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace cli_runner {

inline std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / ("juelab_cli_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

inline int run(const std::string& args, const std::string& stdout_file = "/dev/null") {
    const std::string cmd = std::string("\"") + JUELAB_CLI_PATH + "\" " + args + " >" + stdout_file + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

}  // namespace cli_runner
