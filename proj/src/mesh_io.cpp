#include "homd/mesh_io.hpp"

#include "homd/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

namespace homd {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

// Splits text into lines and lines into whitespace-separated tokens.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  /// Advances to the next line; false at end of input.
  bool next() {
    if (pos_ > text_.size()) return false;
    const std::size_t end = std::min(text_.find('\n', pos_), text_.size());
    line_ = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++number_;
    tokens_.clear();
    std::size_t i = 0;
    while (i < line_.size()) {
      while (i < line_.size() && is_space(line_[i])) ++i;
      if (i >= line_.size() || line_[i] == '#') break;
      const std::size_t start = i;
      while (i < line_.size() && !is_space(line_[i]) && line_[i] != '#') ++i;
      tokens_.push_back(line_.substr(start, i - start));
    }
    return true;
  }

  /// Next line with at least one token; false at end of input.
  bool next_nonempty() {
    while (next()) {
      if (!tokens_.empty()) return true;
    }
    return false;
  }

  const std::vector<std::string_view>& tokens() const { return tokens_; }
  std::size_t number() const { return number_; }

 private:
  std::string_view text_;
  std::string_view line_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
  std::vector<std::string_view> tokens_;
};

double parse_double(std::string_view token, std::size_t line) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw ParseError(line, "bad number '" + std::string(token) + "'");
  }
  return value;
}

long long parse_integer(std::string_view token, std::size_t line) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, "bad index '" + std::string(token) + "'");
  }
  return value;
}

void fan(const std::vector<int>& polygon, std::vector<Triangle>& out) {
  for (std::size_t i = 1; i + 1 < polygon.size(); ++i) {
    out.push_back({polygon[0], polygon[i], polygon[i + 1]});
  }
}

Positions to_positions(const std::vector<Vec3>& points) {
  Positions v(static_cast<Eigen::Index>(points.size()), 3);
  for (std::size_t i = 0; i < points.size(); ++i) v.row(i) = points[i].transpose();
  return v;
}

void append_coordinates(std::string& out, const Positions& v, int i) {
  out += format_coordinate(v(i, 0));
  out += ' ';
  out += format_coordinate(v(i, 1));
  out += ' ';
  out += format_coordinate(v(i, 2));
  out += '\n';
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

MeshData read_obj(std::string_view text) {
  LineReader reader(text);
  std::vector<Vec3> points;
  MeshData data;
  std::vector<std::pair<std::vector<long long>, std::size_t>> faces;
  while (reader.next_nonempty()) {
    const auto& tok = reader.tokens();
    const std::size_t line = reader.number();
    if (tok[0] == "v") {
      if (tok.size() < 4) throw ParseError(line, "vertex needs three coordinates");
      points.emplace_back(parse_double(tok[1], line), parse_double(tok[2], line),
                          parse_double(tok[3], line));
    } else if (tok[0] == "f") {
      if (tok.size() < 4) throw ParseError(line, "face needs at least three vertices");
      std::vector<long long> polygon;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const std::string_view index = tok[i].substr(0, tok[i].find('/'));
        long long value = parse_integer(index, line);
        if (value < 0) {
          value += static_cast<long long>(points.size()) + 1;
          if (value < 1) throw ParseError(line, "relative index before the first vertex");
        } else if (value == 0) {
          throw ParseError(line, "index 0 is not valid in OBJ");
        }
        polygon.push_back(value - 1);
      }
      faces.emplace_back(std::move(polygon), line);
    } else {
      ++data.skipped_directives;
    }
  }

  const auto count = static_cast<long long>(points.size());
  for (const auto& [polygon, line] : faces) {
    std::vector<int> indices;
    for (long long i : polygon) {
      if (i >= count) {
        throw ParseError(line, "index " + std::to_string(i + 1) + " exceeds the " +
                                   std::to_string(count) + " vertices");
      }
      indices.push_back(static_cast<int>(i));
    }
    fan(indices, data.triangles);
  }
  data.vertices = to_positions(points);
  return data;
}

MeshData read_off(std::string_view text) {
  LineReader reader(text);
  if (!reader.next_nonempty()) throw ParseError(0, "empty OFF file");
  std::vector<std::string_view> header = reader.tokens();
  if (header[0] != "OFF") throw ParseError(reader.number(), "missing OFF header");
  header.erase(header.begin());
  if (header.empty()) {
    if (!reader.next_nonempty()) throw ParseError(reader.number(), "missing element counts");
    header = reader.tokens();
  }
  const std::size_t header_line = reader.number();
  if (header.size() < 2 || header.size() > 3) {
    throw ParseError(header_line, "expected 'V F E' counts");
  }
  const long long num_vertices = parse_integer(header[0], header_line);
  const long long num_faces = parse_integer(header[1], header_line);
  if (header.size() == 3) parse_integer(header[2], header_line);
  if (num_vertices < 0 || num_faces < 0 || num_vertices > std::numeric_limits<int>::max()) {
    throw ParseError(header_line, "invalid element counts");
  }

  std::vector<Vec3> points;
  for (long long i = 0; i < num_vertices; ++i) {
    if (!reader.next_nonempty()) {
      throw ParseError(reader.number(), "header declares " + std::to_string(num_vertices) +
                                            " vertices, found " + std::to_string(i));
    }
    const auto& tok = reader.tokens();
    if (tok.size() < 3) throw ParseError(reader.number(), "vertex needs three coordinates");
    points.emplace_back(parse_double(tok[0], reader.number()),
                        parse_double(tok[1], reader.number()),
                        parse_double(tok[2], reader.number()));
  }

  MeshData data;
  for (long long f = 0; f < num_faces; ++f) {
    if (!reader.next_nonempty()) {
      throw ParseError(reader.number(), "header declares " + std::to_string(num_faces) +
                                            " faces, found " + std::to_string(f));
    }
    const auto& tok = reader.tokens();
    const std::size_t line = reader.number();
    const long long n = parse_integer(tok[0], line);
    if (n < 3) throw ParseError(line, "face needs at least three vertices");
    if (static_cast<long long>(tok.size()) - 1 < n) throw ParseError(line, "face is truncated");
    std::vector<int> polygon;
    for (long long i = 1; i <= n; ++i) {
      const long long index = parse_integer(tok[i], line);
      if (index < 0 || index >= num_vertices) {
        throw ParseError(line, "index " + std::to_string(index) + " out of range");
      }
      polygon.push_back(static_cast<int>(index));
    }
    fan(polygon, data.triangles);
  }
  if (reader.next_nonempty()) {
    throw ParseError(reader.number(), "content beyond the counts declared in the header");
  }
  data.vertices = to_positions(points);
  return data;
}

std::string format_coordinate(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::kNonFinite, "cannot write a non-finite coordinate");
  // Round to 9 significant digits, then lay the digits out in fixed notation.
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::scientific, 8);
  const std::string_view sci(buf, result.ptr - buf);
  const std::size_t e = sci.find('e');
  const bool negative = sci.front() == '-';
  std::string digits;
  for (char c : sci.substr(0, e)) {
    if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
  }
  const int exponent = std::atoi(std::string(sci.substr(e + 1)).c_str());

  std::string integer, fraction;
  const int point = exponent + 1;  // digits before the decimal point
  if (point <= 0) {
    integer = "0";
    fraction = std::string(static_cast<std::size_t>(-point), '0') + digits;
  } else if (point >= static_cast<int>(digits.size())) {
    integer = digits + std::string(static_cast<std::size_t>(point) - digits.size(), '0');
  } else {
    integer = digits.substr(0, point);
    fraction = digits.substr(point);
  }
  while (!fraction.empty() && fraction.back() == '0') fraction.pop_back();
  const bool zero = integer.find_first_not_of('0') == std::string::npos && fraction.empty();
  std::string out = (negative && !zero) ? "-" : "";
  out += integer;
  if (!fraction.empty()) out += "." + fraction;
  return out;
}

std::string write_obj(const Mesh& mesh) {
  std::string out;
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    out += "v ";
    append_coordinates(out, mesh.vertices(), i);
  }
  for (const Triangle& t : mesh.triangles()) {
    out += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' +
           std::to_string(t[2] + 1) + '\n';
  }
  return out;
}

std::string write_off(const Mesh& mesh) {
  std::string out = "OFF\n" + std::to_string(mesh.num_vertices()) + ' ' +
                    std::to_string(mesh.num_faces()) + ' ' + std::to_string(mesh.num_edges()) +
                    '\n';
  for (int i = 0; i < mesh.num_vertices(); ++i) append_coordinates(out, mesh.vertices(), i);
  for (const Triangle& t : mesh.triangles()) {
    out += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' +
           std::to_string(t[2]) + '\n';
  }
  return out;
}

Mesh read_mesh_file(const std::filesystem::path& path, int* skipped) {
  const std::string ext = lower_extension(path);
  if (ext != ".obj" && ext != ".off") {
    throw Error(ErrorCode::kIoError, "unsupported mesh format '" + path.string() + "'");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIoError, "cannot read '" + path.string() + "'");
  MeshData data = ext == ".obj" ? read_obj(text) : read_off(text);
  if (skipped) *skipped = data.skipped_directives;
  return Mesh(std::move(data.vertices), std::move(data.triangles));
}

void write_mesh_file(const std::filesystem::path& path, const Mesh& mesh) {
  const std::string ext = lower_extension(path);
  if (ext != ".obj" && ext != ".off") {
    throw Error(ErrorCode::kIoError, "unsupported mesh format '" + path.string() + "'");
  }
  const std::string text = ext == ".obj" ? write_obj(mesh) : write_off(mesh);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
}

}  // namespace homd
