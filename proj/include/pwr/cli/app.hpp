#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pwr::cli {

// Entry point of the command-line tool; returns the process exit code
// (0 success, 2 invalid input, 3 numerical failure).
int run(int argc, char** argv);

struct MomentsTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

MomentsTable read_moments(const std::filesystem::path& file);

}  // namespace pwr::cli
