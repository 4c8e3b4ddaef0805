#include "hyperfit/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hyperfit::io {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

double parse_double(const std::string& text, const char* what, long line_no) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw DatasetError(std::string("dataset: malformed ") + what + " at line " + std::to_string(line_no));
  return value;
}

}  // namespace

std::vector<training::StressSample> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("dataset: cannot open " + path.string());
  std::vector<training::StressSample> samples;
  std::string line;
  long line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.find("mode") == std::string::npos)
        throw DatasetError("dataset: missing `mode,lambda,p1,p3` header at line " + std::to_string(line_no));
      header_seen = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 4)
      throw DatasetError("dataset: expected 4 fields at line " + std::to_string(line_no));
    const auto mode = kinematics::parse_mode(fields[0]);
    if (!mode) throw DatasetError("dataset: unknown mode `" + fields[0] + "` at line " + std::to_string(line_no));
    training::StressSample s;
    s.mode = *mode;
    s.lambda = parse_double(fields[1], "lambda", line_no);
    if (!(s.lambda > 0.0))
      throw DatasetError("dataset: non-positive lambda at line " + std::to_string(line_no));
    s.p1 = parse_double(fields[2], "p1", line_no);
    if (!fields[3].empty()) s.p3 = parse_double(fields[3], "p3", line_no);
    samples.push_back(s);
  }
  if (!header_seen) throw DatasetError("dataset: empty file " + path.string());
  return samples;
}

void save_dataset(const std::filesystem::path& path, std::span<const training::StressSample> samples,
                  std::string_view header_comment) {
  std::ofstream out(path);
  if (!out) throw DatasetError("dataset: cannot write " + path.string());
  if (!header_comment.empty()) {
    std::istringstream lines{std::string(header_comment)};
    std::string l;
    while (std::getline(lines, l)) out << "# " << l << "\n";
  }
  out << "mode,lambda,p1,p3\n";
  char buf[128];
  for (const auto& s : samples) {
    if (s.p3) {
      std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n",
                    std::string(kinematics::to_string(s.mode)).c_str(), s.lambda, s.p1, *s.p3);
    } else {
      std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,\n",
                    std::string(kinematics::to_string(s.mode)).c_str(), s.lambda, s.p1);
    }
    out << buf;
  }
}

}  // namespace hyperfit::io
