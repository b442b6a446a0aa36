#include "metafact/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "metafact/kernels.hpp"
#include "metafact/random.hpp"

namespace metafact::io {

namespace {

constexpr double kMaxDenseEntries = 4e6;

struct Line {
  std::size_t number;
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 1;
  while (!text.empty()) {
    const std::size_t end = text.find('\n');
    std::string_view line = text.substr(0, end);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back({number++, line});
    if (end == std::string_view::npos) break;
    text.remove_prefix(end + 1);
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

[[noreturn]] void parse_error(const std::string& message, std::size_t line) {
  throw Error(ErrorKind::ParseError, message, line);
}

double parse_value(std::string_view token, std::size_t line) {
  std::string_view t = token;
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    parse_error("invalid number '" + std::string(token) + "'", line);
  }
  if (!std::isfinite(value)) parse_error("non-finite value '" + std::string(token) + "'", line);
  return value;
}

Index parse_count(std::string_view token, std::size_t line, const char* what) {
  Index value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    parse_error(std::string("invalid ") + what + " '" + std::string(token) + "'", line);
  }
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Matrix parse_matrix_market(std::string_view text) {
  const std::vector<Line> lines = split_lines(text);
  const std::size_t eof_line = lines.size() + 1;
  if (lines.empty()) parse_error("empty file; expected a %%MatrixMarket banner", 1);

  const std::vector<std::string_view> banner = tokens(lines[0].text);
  if (banner.empty() || lower(banner[0]) != "%%matrixmarket") {
    parse_error("missing %%MatrixMarket banner", 1);
  }
  if (banner.size() != 5) parse_error("banner needs object, format, field and symmetry", 1);
  const std::string object = lower(banner[1]);
  const std::string format = lower(banner[2]);
  const std::string field = lower(banner[3]);
  const std::string symmetry = lower(banner[4]);
  if (object != "matrix") {
    if (object == "vector") throw Error(ErrorKind::UnsupportedFormat, "vector objects are not supported", 1);
    parse_error("unknown object '" + object + "'", 1);
  }
  if (format != "array" && format != "coordinate") parse_error("unknown format '" + format + "'", 1);
  if (field == "complex" || field == "pattern") {
    throw Error(ErrorKind::UnsupportedFormat, field + " matrices are not supported; only real general", 1);
  }
  if (field != "real" && field != "integer" && field != "double") {
    parse_error("unknown field '" + field + "'", 1);
  }
  if (symmetry == "symmetric" || symmetry == "skew-symmetric" || symmetry == "hermitian") {
    throw Error(ErrorKind::UnsupportedFormat, symmetry + " storage is not supported; only general", 1);
  }
  if (symmetry != "general") parse_error("unknown symmetry '" + symmetry + "'", 1);
  const bool coordinate = format == "coordinate";

  // Remaining non-comment, non-blank lines.
  std::vector<Line> body;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string_view t = trim(lines[i].text);
    if (t.empty() || t.front() == '%') continue;
    body.push_back({lines[i].number, t});
  }
  if (body.empty()) parse_error("missing size line", eof_line);

  const Line& size_line = body[0];
  const std::vector<std::string_view> size_tokens = tokens(size_line.text);
  if (size_tokens.size() != (coordinate ? 3u : 2u)) {
    parse_error(coordinate ? "size line must be 'rows cols entries'" : "size line must be 'rows cols'",
                size_line.number);
  }
  const Index m = parse_count(size_tokens[0], size_line.number, "row count");
  const Index n = parse_count(size_tokens[1], size_line.number, "column count");
  if (m == 0 || n == 0) parse_error("dimensions must be positive", size_line.number);
  if (static_cast<double>(m) * static_cast<double>(n) > kMaxDenseEntries) {
    parse_error("dense size " + std::to_string(m) + "x" + std::to_string(n) + " exceeds 4e6 entries",
                size_line.number);
  }
  Matrix out(m, n);

  if (!coordinate) {
    const Index count = m * n;
    for (Index idx = 0; idx < count; ++idx) {
      if (idx + 1 >= body.size()) {
        parse_error("expected " + std::to_string(count) + " values, found " + std::to_string(idx), eof_line);
      }
      const Line& line = body[idx + 1];
      const std::vector<std::string_view> t = tokens(line.text);
      if (t.size() != 1) parse_error("array entries must be one value per line", line.number);
      out(idx % m, idx / m) = parse_value(t[0], line.number);
    }
    if (body.size() - 1 > count) parse_error("more values than rows*cols", body[count + 1].number);
    return out;
  }

  const Index nnz = parse_count(size_tokens[2], size_line.number, "entry count");
  if (static_cast<double>(nnz) > static_cast<double>(m) * static_cast<double>(n)) {
    parse_error("entry count exceeds rows*cols", size_line.number);
  }
  std::vector<bool> seen(m * n, false);
  for (Index e = 0; e < nnz; ++e) {
    if (e + 1 >= body.size()) {
      parse_error("expected " + std::to_string(nnz) + " entries, found " + std::to_string(e), eof_line);
    }
    const Line& line = body[e + 1];
    const std::vector<std::string_view> t = tokens(line.text);
    if (t.size() != 3) parse_error("coordinate entries must be 'row col value'", line.number);
    const Index i = parse_count(t[0], line.number, "row index");
    const Index j = parse_count(t[1], line.number, "column index");
    if (i < 1 || i > m || j < 1 || j > n) {
      parse_error("index (" + std::string(t[0]) + ", " + std::string(t[1]) + ") outside " + std::to_string(m) +
                      "x" + std::to_string(n),
                  line.number);
    }
    if (seen[(i - 1) * n + (j - 1)]) parse_error("duplicate entry", line.number);
    seen[(i - 1) * n + (j - 1)] = true;
    out(i - 1, j - 1) = parse_value(t[2], line.number);
  }
  if (body.size() - 1 > nnz) parse_error("more entries than declared", body[nnz + 1].number);
  return out;
}

Matrix read_matrix_market(const std::filesystem::path& path) { return parse_matrix_market(read_file(path)); }

std::string format_matrix_market(const Matrix& m) {
  std::string out = "%%MatrixMarket matrix array real general\n";
  out += std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) out += format_value(m(i, j)) + "\n";
  return out;
}

void write_matrix_market(const Matrix& m, const std::filesystem::path& path) {
  write_file(path, format_matrix_market(m));
}

Matrix parse_csv(std::string_view text) {
  const std::vector<Line> lines = split_lines(text);
  if (lines.empty()) parse_error("empty file", 1);
  std::vector<double> data;
  Index cols = 0;
  for (const Line& line : lines) {
    if (trim(line.text).empty()) parse_error("blank line", line.number);
    Index count = 0;
    std::string_view rest = line.text;
    while (true) {
      const std::size_t comma = rest.find(',');
      const std::string_view field = trim(rest.substr(0, comma));
      if (field.empty()) parse_error("empty field", line.number);
      data.push_back(parse_value(field, line.number));
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols == 0) {
      cols = count;
    } else if (count != cols) {
      parse_error("row has " + std::to_string(count) + " fields, expected " + std::to_string(cols), line.number);
    }
  }
  return Matrix(lines.size(), cols, std::move(data));
}

Matrix read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

std::string format_csv(const Matrix& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_value(m(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Matrix& m, const std::filesystem::path& path) { write_file(path, format_csv(m)); }

std::string_view kind_name(SyntheticKind kind) noexcept {
  switch (kind) {
    case SyntheticKind::RankK: return "rank_k";
    case SyntheticKind::DecayingGeometric: return "decaying_geometric";
    case SyntheticKind::DecayingPolynomial: return "decaying_polynomial";
    case SyntheticKind::IdentityLike: return "identity_like";
  }
  return "unknown";
}

void SyntheticSpec::validate() const {
  if (m == 0 || n == 0) throw Error(ErrorKind::InvalidSpec, "dimensions must be at least 1");
  if (static_cast<double>(m) * static_cast<double>(n) > kMaxDenseEntries) {
    throw Error(ErrorKind::InvalidSpec, "dimensions exceed 4e6 entries");
  }
  switch (kind) {
    case SyntheticKind::RankK:
      if (k == 0 || k > std::min(m, n)) throw Error(ErrorKind::InvalidSpec, "rank_k needs 1 <= k <= min(m,n)");
      break;
    case SyntheticKind::DecayingGeometric:
      if (!(decay > 0.0 && decay < 1.0)) throw Error(ErrorKind::InvalidSpec, "geometric decay must be in (0,1)");
      break;
    case SyntheticKind::DecayingPolynomial:
      if (!(decay > 0.0) || !std::isfinite(decay)) {
        throw Error(ErrorKind::InvalidSpec, "polynomial decay must be positive");
      }
      break;
    case SyntheticKind::IdentityLike: break;
  }
}

std::string SyntheticSpec::to_string() const {
  std::string out = std::string(kind_name(kind)) + ":" + std::to_string(m) + "x" + std::to_string(n);
  if (kind == SyntheticKind::RankK) out += ":k=" + std::to_string(k);
  if (kind == SyntheticKind::DecayingGeometric || kind == SyntheticKind::DecayingPolynomial) {
    out += ":decay=" + format_value(decay);
  }
  out += ":seed=" + std::to_string(seed);
  return out;
}

SyntheticSpec parse_synthetic_spec(std::string_view text, std::uint64_t default_seed) {
  std::vector<std::string_view> parts;
  std::string_view rest = text;
  while (true) {
    const std::size_t colon = rest.find(':');
    parts.push_back(rest.substr(0, colon));
    if (colon == std::string_view::npos) break;
    rest.remove_prefix(colon + 1);
  }
  auto bad = [&](const std::string& why) -> Error {
    return Error(ErrorKind::InvalidSpec, "synthetic spec '" + std::string(text) + "': " + why);
  };
  if (parts.size() < 2) throw bad("expected kind:MxN[:key=val]...");

  SyntheticSpec spec;
  if (parts[0] == "rank_k") {
    spec.kind = SyntheticKind::RankK;
  } else if (parts[0] == "decaying_geometric") {
    spec.kind = SyntheticKind::DecayingGeometric;
    spec.decay = 0.5;
  } else if (parts[0] == "decaying_polynomial") {
    spec.kind = SyntheticKind::DecayingPolynomial;
    spec.decay = 1.0;
  } else if (parts[0] == "identity_like") {
    spec.kind = SyntheticKind::IdentityLike;
  } else {
    throw bad("unknown kind '" + std::string(parts[0]) + "'");
  }

  const std::string_view shape = parts[1];
  const std::size_t x = shape.find('x');
  if (x == std::string_view::npos) throw bad("shape must be MxN");
  auto parse_index = [&](std::string_view s, const char* what) {
    Index v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw bad(std::string("invalid ") + what + " '" + std::string(s) + "'");
    }
    return v;
  };
  spec.m = parse_index(shape.substr(0, x), "row count");
  spec.n = parse_index(shape.substr(x + 1), "column count");
  spec.seed = default_seed;

  bool have_k = false;
  for (std::size_t i = 2; i < parts.size(); ++i) {
    const std::size_t eq = parts[i].find('=');
    if (eq == std::string_view::npos) throw bad("expected key=val, got '" + std::string(parts[i]) + "'");
    const std::string_view key = parts[i].substr(0, eq);
    const std::string_view val = parts[i].substr(eq + 1);
    if (key == "k") {
      spec.k = parse_index(val, "rank");
      have_k = true;
    } else if (key == "seed") {
      std::uint64_t s = 0;
      const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), s);
      if (val.empty() || ec != std::errc() || ptr != val.data() + val.size()) {
        throw bad("invalid seed '" + std::string(val) + "'");
      }
      spec.seed = s;
    } else if (key == "decay") {
      double d = 0.0;
      const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), d);
      if (val.empty() || ec != std::errc() || ptr != val.data() + val.size()) {
        throw bad("invalid decay '" + std::string(val) + "'");
      }
      spec.decay = d;
    } else {
      throw bad("unknown key '" + std::string(key) + "'");
    }
  }
  if (spec.kind == SyntheticKind::RankK && !have_k) throw bad("rank_k requires k=");
  spec.validate();
  return spec;
}

Matrix generate(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  switch (spec.kind) {
    case SyntheticKind::RankK: {
      const Matrix left = rng.gaussian(spec.m, spec.k);
      const Matrix right = rng.gaussian(spec.k, spec.n);
      return left * right;
    }
    case SyntheticKind::IdentityLike: return Matrix::eye(spec.m, spec.n);
    case SyntheticKind::DecayingGeometric:
    case SyntheticKind::DecayingPolynomial: {
      const Index p = std::min(spec.m, spec.n);
      const Matrix gu = rng.gaussian(spec.m, p);
      const Matrix gv = rng.gaussian(spec.n, p);
      Matrix u = kernels::qr(gu).q;
      const Matrix v = kernels::qr(gv).q;
      for (Index j = 0; j < p; ++j) {
        const double sigma = spec.kind == SyntheticKind::DecayingGeometric
                                 ? std::pow(spec.decay, static_cast<double>(j))
                                 : std::pow(static_cast<double>(j + 1), -spec.decay);
        for (Index i = 0; i < spec.m; ++i) u(i, j) *= sigma;
      }
      return times_transpose(u, v);
    }
  }
  throw Error(ErrorKind::InvalidSpec, "unknown synthetic kind");
}

}  // namespace metafact::io
