#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fpt/geometry.hpp"

namespace fpt {

// Calibration file (UTF-8 JSON):
//   { "intrinsics": [9 reals, row-major],
//     "extrinsic":  [16 reals, row-major 4x4, bottom row 0 0 0 1],
//     "width": W, "height": H }
// The extrinsic maps LiDAR coordinates into the camera frame.
CalibratedCamera parse_calibration(const std::string& json_text);
std::string format_calibration(const CalibratedCamera& camera);
CalibratedCamera read_calibration(const std::filesystem::path& path);
void write_calibration(const std::filesystem::path& path, const CalibratedCamera& camera);

// Pose file: one 4x4 row-major matrix per line as 16 whitespace-separated
// reals. Blank lines and lines starting with '#' are skipped.
std::vector<RigidTransform> parse_poses(const std::string& text);
std::string format_poses(const std::vector<RigidTransform>& poses);
std::vector<RigidTransform> read_poses(const std::filesystem::path& path);
void write_poses(const std::filesystem::path& path, const std::vector<RigidTransform>& poses);

// Whole-file helpers shared by the readers/writers.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fpt
