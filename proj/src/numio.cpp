#include "fvs/numio.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fvs {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, Errc on_error,
                    const std::string& context) {
  if (s.empty()) raise(on_error, context + ": empty number");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    raise(on_error, context + ": bad number '" + s + "'");
  return v;
}

nlohmann::json doubles_to_json(std::span<const double> v) {
  nlohmann::json arr = nlohmann::json::array();
  for (double x : v) arr.push_back(format_g17(x));
  return arr;
}

std::vector<double> doubles_from_json(const nlohmann::json& j,
                                      const std::string& context) {
  if (!j.is_array()) raise(Errc::malformed_config, context + ": not an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (e.is_string()) {
      out.push_back(
          parse_double(e.get<std::string>(), Errc::malformed_config, context));
    } else if (e.is_number()) {
      out.push_back(e.get<double>());
    } else {
      raise(Errc::malformed_config, context + ": array element not a number");
    }
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) raise(Errc::write_failed, "cannot write " + tmp);
    f << content;
    if (!f.good()) raise(Errc::write_failed, "write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) raise(Errc::write_failed, "rename failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) raise(Errc::file_not_found, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace fvs
