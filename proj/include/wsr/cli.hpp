#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wsr/train.hpp"

namespace wsr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Cameras from JSON plus `<dir>/<camera id>.png` (or .ppm) for each camera.
Dataset load_dataset(const std::filesystem::path& cameras, const std::filesystem::path& images);

}  // namespace wsr
