#include "cdrp/path.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace cdrp {

Grid::Grid(Eigen::VectorXd times) : times_(std::move(times)) {
  if (times_.size() < 2) throw std::domain_error("Grid: needs at least 2 points");
  for (Eigen::Index i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) throw std::domain_error("Grid: non-finite time");
    if (i > 0 && !(times_[i] > times_[i - 1])) throw std::domain_error("Grid: times must strictly increase");
  }
}

Grid Grid::uniform(double a, double b, Eigen::Index intervals) {
  if (intervals < 1) throw std::domain_error("Grid::uniform: needs at least one interval");
  if (!(a < b)) throw std::domain_error("Grid::uniform: requires a < b");
  Eigen::VectorXd t(intervals + 1);
  for (Eigen::Index i = 0; i <= intervals; ++i) {
    t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(intervals);
  }
  t[intervals] = b;
  return Grid(std::move(t));
}

Grid Grid::parse(std::string_view spec) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = spec.find(':', start);
    parts.push_back(spec.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (parts.size() != 3) throw std::invalid_argument("grid spec must be a:b:N");
  auto to_double = [](std::string_view s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(std::string(s), &used);
      if (used != s.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument("grid spec: bad number '" + std::string(s) + "'");
    }
  };
  long long n = 0;
  const auto [ptr, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), n);
  if (ec != std::errc() || ptr != parts[2].data() + parts[2].size() || n < 1) {
    throw std::invalid_argument("grid spec: N must be a positive integer");
  }
  return uniform(to_double(parts[0]), to_double(parts[1]), n);
}

Eigen::Index Grid::find(double t) const {
  const auto begin = times_.data();
  const auto end = begin + times_.size();
  const auto it = std::lower_bound(begin, end, t - 1e-12 * std::max(1.0, std::abs(t)));
  if (it == end) return -1;
  if (std::abs(*it - t) <= 1e-12 * std::max(1.0, std::abs(t))) return it - begin;
  return -1;
}

double interpolate(const Grid& grid, const Eigen::VectorXd& values, double t) {
  const auto& times = grid.times();
  if (t < grid.origin() || t > grid.horizon()) throw std::domain_error("interpolate: time outside grid");
  const auto begin = times.data();
  const auto end = begin + times.size();
  auto it = std::upper_bound(begin, end, t);
  if (it == end) return values[times.size() - 1];
  const Eigen::Index hi = it - begin;
  const Eigen::Index lo = hi - 1;
  const double w = (t - times[lo]) / (times[hi] - times[lo]);
  return (1.0 - w) * values[lo] + w * values[hi];
}

Path::Path(Grid g, Eigen::VectorXd v, double sigma)
    : grid(std::move(g)), values(std::move(v)), diffusion_coeff(sigma) {
  if (values.size() != grid.size()) throw std::domain_error("Path: length mismatch");
  if (!(sigma > 0.0)) throw std::domain_error("Path: diffusion coefficient must be > 0");
}

double Path::at(double t) const { return interpolate(grid, values, t); }

PairPath::PairPath(Grid g, Eigen::VectorXd up, Eigen::VectorXd low, double sigma)
    : grid(std::move(g)), upper(std::move(up)), lower(std::move(low)), diffusion_coeff(sigma) {
  if (upper.size() != grid.size() || lower.size() != grid.size()) {
    throw std::domain_error("PairPath: length mismatch");
  }
}

double PairPath::upper_at(double t) const { return interpolate(grid, upper, t); }
double PairPath::lower_at(double t) const { return interpolate(grid, lower, t); }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, const Path& path) {
  out << "time,value\n";
  for (Eigen::Index i = 0; i < path.grid.size(); ++i) {
    out << format_double(path.grid[i]) << ',' << format_double(path.values[i]) << '\n';
  }
}

void write_csv(std::ostream& out, const PairPath& pair) {
  out << "time,value1,value2\n";
  for (Eigen::Index i = 0; i < pair.grid.size(); ++i) {
    out << format_double(pair.grid[i]) << ',' << format_double(pair.upper[i]) << ','
        << format_double(pair.lower[i]) << '\n';
  }
}

}  // namespace cdrp
