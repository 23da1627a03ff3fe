#include "lisal/harness/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>
#include <vector>

namespace lisal::harness {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view s, const std::string& source, std::size_t line, const char* column) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    throw ParseError(source, line, std::string("column ") + column + ": '" + std::string(s) + "' is not a number");
  }
  if (!std::isfinite(v)) throw ParseError(source, line, std::string("column ") + column + " is not finite");
  return v;
}

}  // namespace

Dataset parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty file, expected header x,y,t,value,split");
  if (line != "x,y,t,value,split") throw ParseError(source, 1, "expected header x,y,t,value,split");

  PointList train_pts, test_pts;
  std::vector<double> train_vals, test_vals;
  std::set<std::tuple<double, double, double, bool>> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 5) {
      throw ParseError(source, lineno, "expected 5 fields, got " + std::to_string(f.size()));
    }
    const Point p{parse_number(f[0], source, lineno, "x"), parse_number(f[1], source, lineno, "y"),
                  parse_number(f[2], source, lineno, "t")};
    const double v = parse_number(f[3], source, lineno, "value");
    bool is_train = false;
    if (f[4] == "train") {
      is_train = true;
    } else if (f[4] != "test") {
      throw ParseError(source, lineno, "split must be train or test, got '" + std::string(f[4]) + "'");
    }
    if (!seen.emplace(p.x, p.y, p.t, is_train).second) {
      throw ParseError(source, lineno, "duplicate (x, y, t, split) row");
    }
    (is_train ? train_pts : test_pts).push_back(p);
    (is_train ? train_vals : test_vals).push_back(v);
  }
  return Dataset{ObservationSet(std::move(train_pts), std::move(train_vals)),
                 ObservationSet(std::move(test_pts), std::move(test_vals))};
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_csv(in, path.string());
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17) << "x,y,t,value,split\n";
  const auto dump = [&out](const ObservationSet& s, const char* split) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Point& p = s.points()[i];
      out << p.x << ',' << p.y << ',' << p.t << ',' << s.values()[static_cast<Eigen::Index>(i)] << ',' << split
          << '\n';
    }
  };
  dump(data.train, "train");
  dump(data.test, "test");
  if (!out) throw IoError("failed writing " + path.string());
}

Standardizer Standardizer::fit(const Eigen::VectorXd& values) {
  Standardizer s;
  if (values.size() == 0) return s;
  s.mean = values.mean();
  const double var = (values.array() - s.mean).square().mean();
  s.sd = var > 0.0 ? std::sqrt(var) : 1.0;
  return s;
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& v) const { return (v.array() - mean) / sd; }

Eigen::VectorXd Standardizer::invert(const Eigen::VectorXd& v) const { return v.array() * sd + mean; }

ObservationSet Standardizer::apply(const ObservationSet& data) const {
  return ObservationSet(data.points(), apply(data.values()));
}

}  // namespace lisal::harness
