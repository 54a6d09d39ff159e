#include "saferl/zonotope.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <utility>
#include <vector>

#include "saferl/errors.hpp"

namespace saferl {

Zonotope::Zonotope(Eigen::VectorXd c, Eigen::MatrixXd g)
    : center(std::move(c)), generators(std::move(g)) {
  validate();
}

Zonotope Zonotope::point(Eigen::VectorXd c) {
  Zonotope z;
  z.generators.resize(c.size(), 0);
  z.center = std::move(c);
  return z;
}

Zonotope Zonotope::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (lo.size() != hi.size()) throw DimensionError("box: lo/hi size mismatch");
  Zonotope z;
  z.center = 0.5 * (lo + hi);
  z.generators = (0.5 * (hi - lo)).asDiagonal();
  z.validate();
  return z;
}

double Zonotope::support(const Eigen::VectorXd& dir) const {
  if (dir.size() != dim()) throw DimensionError("support: direction dim mismatch");
  return dir.dot(center) + (generators.transpose() * dir).cwiseAbs().sum();
}

void Zonotope::bounding_box(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const {
  const Eigen::VectorXd radius = generators.cwiseAbs().rowwise().sum();
  lo = center - radius;
  hi = center + radius;
}

Zonotope Zonotope::linear_map(const Eigen::MatrixXd& m) const {
  if (m.cols() != dim()) throw DimensionError("linear_map: matrix cols != dim");
  Zonotope z;
  z.center = m * center;
  z.generators = m * generators;
  return z;
}

Zonotope Zonotope::translate(const Eigen::VectorXd& v) const {
  if (v.size() != dim()) throw DimensionError("translate: vector dim mismatch");
  Zonotope z = *this;
  z.center += v;
  return z;
}

void Zonotope::validate() const {
  if (generators.rows() != center.size())
    throw DimensionError("zonotope: generator rows != center dim");
  if (!center.allFinite() || !generators.allFinite())
    throw NumericalError("zonotope: non-finite entries");
}

namespace {

// Line-oriented tokenizer that skips '#' comments and blank lines.
bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    return true;
  }
  return false;
}

std::vector<double> parse_doubles(const std::string& line, const char* what) {
  std::vector<double> out;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p != end) {
    while (p != end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p == end) break;
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) throw ConfigError(std::string("zonotope file: bad number in ") + what);
    out.push_back(v);
    p = next;
  }
  return out;
}

long parse_keyword_count(const std::string& line, const std::string& key) {
  std::istringstream ss(line);
  std::string word;
  ss >> word;
  if (word != key) throw ConfigError("zonotope file: expected '" + key + "', got '" + word + "'");
  long n = -1;
  ss >> n;
  if (!ss || n < 0) throw ConfigError("zonotope file: bad count after '" + key + "'");
  return n;
}

}  // namespace

Zonotope read_zonotope(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) throw ConfigError("zonotope file: empty");
  const long n = parse_keyword_count(line, "dim");

  if (!next_line(in, line)) throw ConfigError("zonotope file: missing center");
  std::istringstream cs(line);
  std::string word;
  cs >> word;
  if (word != "center") throw ConfigError("zonotope file: expected 'center'");
  std::string rest;
  std::getline(cs, rest);
  const auto cvals = parse_doubles(rest, "center");
  if (static_cast<long>(cvals.size()) != n)
    throw ConfigError("zonotope file: center has wrong width");

  if (!next_line(in, line)) throw ConfigError("zonotope file: missing generators");
  const long eta = parse_keyword_count(line, "generators");

  Zonotope z;
  z.center = Eigen::Map<const Eigen::VectorXd>(cvals.data(), n);
  z.generators.resize(n, eta);
  for (long j = 0; j < eta; ++j) {
    if (!next_line(in, line)) throw ConfigError("zonotope file: missing generator row");
    const auto gvals = parse_doubles(line, "generator row");
    if (static_cast<long>(gvals.size()) != n)
      throw ConfigError("zonotope file: generator row has wrong width");
    for (long i = 0; i < n; ++i) z.generators(i, j) = gvals[i];
  }
  z.validate();
  return z;
}

Zonotope load_zonotope(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open zonotope file: " + path);
  return read_zonotope(f);
}

void write_zonotope(std::ostream& out, const Zonotope& z) {
  out << std::setprecision(17);
  out << "dim " << z.dim() << "\n";
  out << "center";
  for (Eigen::Index i = 0; i < z.dim(); ++i) out << " " << z.center(i);
  out << "\n";
  out << "generators " << z.num_generators() << "\n";
  for (Eigen::Index j = 0; j < z.num_generators(); ++j) {
    for (Eigen::Index i = 0; i < z.dim(); ++i) out << (i ? " " : "") << z.generators(i, j);
    out << "\n";
  }
}

void save_zonotope(const std::string& path, const Zonotope& z) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write zonotope file: " + path);
  write_zonotope(f, z);
}

}  // namespace saferl
