#include "fpt/calibration.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fpt/error.hpp"

namespace fpt {

namespace {

using nlohmann::json;

std::vector<double> real_array(const json& doc, const char* key, std::size_t expected) {
  if (!doc.contains(key)) throw FormatError(std::string("calibration is missing \"") + key + "\"");
  const json& arr = doc.at(key);
  if (!arr.is_array() || arr.size() != expected)
    throw FormatError(std::string("calibration field \"") + key + "\" must be an array of " +
                      std::to_string(expected) + " numbers");
  std::vector<double> out;
  out.reserve(expected);
  for (const json& v : arr) {
    if (!v.is_number())
      throw FormatError(std::string("calibration field \"") + key + "\" contains a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

std::uint32_t dimension(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_number_unsigned())
    throw FormatError(std::string("calibration field \"") + key +
                      "\" must be a non-negative integer");
  const auto value = doc.at(key).get<std::uint64_t>();
  if (value == 0 || value > UINT32_MAX)
    throw FormatError(std::string("calibration field \"") + key + "\" is out of range");
  return static_cast<std::uint32_t>(value);
}

std::string format_real(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

CalibratedCamera parse_calibration(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("calibration is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("calibration must be a JSON object");

  const auto k = real_array(doc, "intrinsics", 9);
  const auto e = real_array(doc, "extrinsic", 16);
  Mat3 km;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) km(r, c) = k[static_cast<std::size_t>(r * 3 + c)];
  Mat4 em;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) em(r, c) = e[static_cast<std::size_t>(r * 4 + c)];

  try {
    return CalibratedCamera{CameraIntrinsics(km, dimension(doc, "width"), dimension(doc, "height")),
                            RigidTransform::from_matrix(em)};
  } catch (const InvalidArgument& err) {
    throw FormatError(std::string("invalid calibration: ") + err.what());
  }
}

std::string format_calibration(const CalibratedCamera& camera) {
  json doc;
  json k = json::array();
  json e = json::array();
  const Mat3& km = camera.intrinsics.matrix();
  const Mat4 em = camera.extrinsic.matrix();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) k.push_back(km(r, c));
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) e.push_back(em(r, c));
  doc["intrinsics"] = std::move(k);
  doc["extrinsic"] = std::move(e);
  doc["width"] = camera.intrinsics.width();
  doc["height"] = camera.intrinsics.height();
  return doc.dump(2) + "\n";
}

CalibratedCamera read_calibration(const std::filesystem::path& path) {
  try {
    return parse_calibration(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_calibration(const std::filesystem::path& path, const CalibratedCamera& camera) {
  write_text_file(path, format_calibration(camera));
}

std::vector<RigidTransform> parse_poses(const std::string& text) {
  std::vector<RigidTransform> poses;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::vector<double> values;
    const char* p = line.data() + first;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p == end) break;
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc())
        throw FormatError("pose line " + std::to_string(line_no) + ": malformed number");
      values.push_back(v);
      p = res.ptr;
    }
    if (values.size() != 16)
      throw FormatError("pose line " + std::to_string(line_no) + ": expected 16 values, got " +
                        std::to_string(values.size()));
    Mat4 m;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) m(r, c) = values[static_cast<std::size_t>(r * 4 + c)];
    try {
      poses.push_back(RigidTransform::from_matrix(m));
    } catch (const InvalidArgument& e) {
      throw FormatError("pose line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return poses;
}

std::string format_poses(const std::vector<RigidTransform>& poses) {
  std::string out;
  for (const auto& pose : poses) {
    const Mat4 m = pose.matrix();
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        if (r + c > 0) out += ' ';
        out += format_real(m(r, c));
      }
    out += '\n';
  }
  return out;
}

std::vector<RigidTransform> read_poses(const std::filesystem::path& path) {
  try {
    return parse_poses(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_poses(const std::filesystem::path& path, const std::vector<RigidTransform>& poses) {
  write_text_file(path, format_poses(poses));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw FormatError("failed writing " + path.string());
}

}  // namespace fpt
