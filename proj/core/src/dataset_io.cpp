#include "confdiff/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>

#include "confdiff/error.hpp"

namespace confdiff {

std::string format_double(double v) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

namespace {

void write_values(std::ostream& out, const Vector& v) {
  for (double x : v) out << format_double(x) << ',';
}

struct Header {
  std::string kind;
  std::map<std::string, std::string, std::less<>> fields;

  std::size_t count(std::string_view key) const {
    const auto it = fields.find(key);
    if (it == fields.end()) throw InvalidInput("header is missing '" + std::string(key) + "'");
    std::size_t v = 0;
    const auto& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw InvalidInput("bad header value for " + std::string(key));
    return v;
  }

  double real(std::string_view key) const {
    const auto it = fields.find(key);
    if (it == fields.end()) throw InvalidInput("header is missing '" + std::string(key) + "'");
    double v = 0;
    const auto& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw InvalidInput("bad header value for " + std::string(key));
    return v;
  }
};

Header read_header(std::istream& in, std::string_view expected_kind) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("missing header line");
  std::istringstream ss(line);
  std::string hash;
  Header h;
  ss >> hash >> h.kind;
  if (hash != "#" || h.kind != expected_kind) {
    throw InvalidInput("expected a '# " + std::string(expected_kind) + "' header");
  }
  std::string token;
  while (ss >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw InvalidInput("malformed header field '" + token + "'");
    h.fields.emplace(token.substr(0, eq), token.substr(eq + 1));
  }
  return h;
}

std::vector<double> parse_row(const std::string& line, std::size_t expected) {
  std::vector<double> values;
  values.reserve(expected);
  const char* p = line.data();
  const char* end = line.data() + line.size();
  while (p <= end) {
    const char* comma = std::find(p, end, ',');
    double v = 0;
    const auto [ptr, ec] = std::from_chars(p, comma, v);
    if (ec != std::errc() || ptr != comma) throw InvalidInput("malformed number in row '" + line + "'");
    values.push_back(v);
    p = comma + 1;
  }
  if (values.size() != expected) {
    throw InvalidInput("row has " + std::to_string(values.size()) + " fields, expected " +
                       std::to_string(expected));
  }
  return values;
}

template <typename Fn>
void read_rows(std::istream& in, std::size_t n, std::size_t width, Fn&& on_row) {
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (rows == n) throw InvalidInput("more rows than the header declares");
    on_row(parse_row(line, width));
    ++rows;
  }
  if (rows != n) throw InvalidInput("fewer rows than the header declares");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

void write_confdiff(std::ostream& out, const ConfDiffDataset& data) {
  out << "# confdiff d=" << data.dim() << " n=" << data.size() << " prior=" << format_double(data.class_prior)
      << '\n';
  for (const auto& p : data.pairs) {
    write_values(out, p.x);
    write_values(out, p.x_prime);
    out << format_double(p.c) << '\n';
  }
}

void write_pcomp(std::ostream& out, const PcompDataset& data) {
  out << "# pcomp d=" << data.dim() << " n=" << data.size() << " prior=" << format_double(data.class_prior)
      << '\n';
  for (const auto& p : data.pairs) {
    write_values(out, p.x);
    for (std::size_t k = 0; k < p.x_prime.size(); ++k) {
      out << format_double(p.x_prime[k]) << (k + 1 < p.x_prime.size() ? "," : "");
    }
    out << '\n';
  }
}

void write_labeled(std::ostream& out, const std::vector<LabeledExample>& data) {
  const std::size_t d = data.empty() ? 0 : data.front().x.size();
  out << "# labeled d=" << d << " n=" << data.size() << '\n';
  for (const auto& e : data) {
    write_values(out, e.x);
    out << (e.y == Label::positive ? "1" : "-1") << '\n';
  }
}

void write_soft_labeled(std::ostream& out, const std::vector<SoftLabeledExample>& data) {
  const std::size_t d = data.empty() ? 0 : data.front().x.size();
  out << "# soft d=" << d << " n=" << data.size() << '\n';
  for (const auto& e : data) {
    write_values(out, e.x);
    out << format_double(e.r) << '\n';
  }
}

ConfDiffDataset read_confdiff(std::istream& in) {
  const Header h = read_header(in, "confdiff");
  const std::size_t d = h.count("d");
  const std::size_t n = h.count("n");
  ConfDiffDataset data;
  data.class_prior = h.real("prior");
  data.pairs.reserve(n);
  read_rows(in, n, 2 * d + 1, [&](std::vector<double> row) {
    data.pairs.push_back({Vector(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(d)),
                          Vector(row.begin() + static_cast<std::ptrdiff_t>(d), row.end() - 1), row.back()});
  });
  data.validate();
  return data;
}

PcompDataset read_pcomp(std::istream& in) {
  const Header h = read_header(in, "pcomp");
  const std::size_t d = h.count("d");
  const std::size_t n = h.count("n");
  PcompDataset data;
  data.class_prior = h.real("prior");
  data.pairs.reserve(n);
  read_rows(in, n, 2 * d, [&](std::vector<double> row) {
    data.pairs.push_back({Vector(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(d)),
                          Vector(row.begin() + static_cast<std::ptrdiff_t>(d), row.end())});
  });
  data.validate();
  return data;
}

std::vector<LabeledExample> read_labeled(std::istream& in) {
  const Header h = read_header(in, "labeled");
  const std::size_t d = h.count("d");
  const std::size_t n = h.count("n");
  std::vector<LabeledExample> out;
  out.reserve(n);
  read_rows(in, n, d + 1, [&](std::vector<double> row) {
    const double y = row.back();
    if (y != 1.0 && y != -1.0) throw InvalidInput("label must be +1 or -1");
    row.pop_back();
    out.push_back({std::move(row), y > 0 ? Label::positive : Label::negative});
  });
  return out;
}

std::vector<SoftLabeledExample> read_soft_labeled(std::istream& in) {
  const Header h = read_header(in, "soft");
  const std::size_t d = h.count("d");
  const std::size_t n = h.count("n");
  std::vector<SoftLabeledExample> out;
  out.reserve(n);
  read_rows(in, n, d + 1, [&](std::vector<double> row) {
    const double r = row.back();
    if (!(r >= 0.0 && r <= 1.0)) throw InvalidInput("soft label must lie in [0, 1]");
    row.pop_back();
    out.push_back({std::move(row), r});
  });
  return out;
}

void save_confdiff(const std::string& path, const ConfDiffDataset& data) {
  auto out = open_out(path);
  write_confdiff(out, data);
}

ConfDiffDataset load_confdiff(const std::string& path) {
  auto in = open_in(path);
  return read_confdiff(in);
}

void save_labeled(const std::string& path, const std::vector<LabeledExample>& data) {
  auto out = open_out(path);
  write_labeled(out, data);
}

std::vector<LabeledExample> load_labeled(const std::string& path) {
  auto in = open_in(path);
  return read_labeled(in);
}

}  // namespace confdiff
