#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "rigidcal/error.hpp"
#include "rigidcal/geom.hpp"
#include "rigidcal/io.hpp"

namespace rigidcal::cli {

// Exit codes are part of the scripting interface.
inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitGeometry = 3;
inline constexpr int kExitLookup = 4;

int exit_code_for(ErrorCode code);

int cmd_calibrate(const std::string& session_path, const std::string& output_path, std::ostream& out,
                  std::ostream& err);
int cmd_simulate(const std::string& config_path, const std::string& output_dir_override, std::ostream& out,
                 std::ostream& err);
int cmd_transform(const std::string& calib_path, const std::string& from, const std::string& to, const Point3& point,
                  io::Units units, std::ostream& out, std::ostream& err);
// Each measurement spec is TOOL=path.
int cmd_evaluate(const std::string& calib_path, const std::vector<std::string>& measurement_specs, io::Units units,
                 std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rigidcal::cli
