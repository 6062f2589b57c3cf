#include "stablerank/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "stablerank/csv.hpp"
#include "stablerank/geometry.hpp"

namespace stablerank {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

Direction parse_direction(std::string_view s) {
  s = trim(s);
  if (s == "higher" || s == "higher_preferred" || s == "max") return Direction::higher_preferred;
  if (s == "lower" || s == "lower_preferred" || s == "min") return Direction::lower_preferred;
  throw ValidationError("unknown attribute direction '" + std::string(s) + "'");
}

double apply(Transform t, double v, std::size_t row, const std::string& column) {
  switch (t) {
    case Transform::identity:
      return v;
    case Transform::log:
      if (v <= 0.0) throw ParseError(row, "log of non-positive value in column '" + column + "'");
      return std::log(v);
    case Transform::log1p:
      if (v <= -1.0) throw ParseError(row, "log1p of value <= -1 in column '" + column + "'");
      return std::log1p(v);
    case Transform::sqrt:
      if (v < 0.0) throw ParseError(row, "sqrt of negative value in column '" + column + "'");
      return std::sqrt(v);
  }
  return v;
}

}  // namespace

AttributeSpec AttributeSpec::parse(std::string_view text) {
  AttributeSpec spec;
  std::string_view body = text;
  if (auto colon = text.rfind(':'); colon != std::string_view::npos) {
    spec.direction = parse_direction(text.substr(colon + 1));
    body = text.substr(0, colon);
  }
  body = trim(body);
  if (auto eq = body.find('='); eq != std::string_view::npos) {
    spec.name = std::string(trim(body.substr(0, eq)));
    std::string_view expr = trim(body.substr(eq + 1));
    auto open = expr.find('(');
    if (open == std::string_view::npos || expr.back() != ')') {
      throw ValidationError("derived attribute must look like NAME=fn(COLUMN)");
    }
    std::string_view fn = trim(expr.substr(0, open));
    spec.source = std::string(trim(expr.substr(open + 1, expr.size() - open - 2)));
    if (fn == "log") {
      spec.transform = Transform::log;
    } else if (fn == "log1p") {
      spec.transform = Transform::log1p;
    } else if (fn == "sqrt") {
      spec.transform = Transform::sqrt;
    } else {
      throw ValidationError("unknown transform '" + std::string(fn) + "'");
    }
  } else {
    spec.name = std::string(body);
    spec.source = spec.name;
  }
  if (spec.name.empty() || spec.source.empty()) throw ValidationError("empty attribute name");
  return spec;
}

Dataset::Dataset(std::vector<std::string> ids, Matrix attrs, std::vector<AttributeMeta> meta)
    : ids_(std::move(ids)), attrs_(std::move(attrs)), meta_(std::move(meta)) {
  if (ids_.empty()) throw ValidationError("dataset must contain at least one item");
  if (attrs_.cols() < 2) throw ValidationError("dataset needs at least 2 scoring attributes");
  if (static_cast<std::size_t>(attrs_.rows()) != ids_.size()) {
    throw DimensionError("dataset: ids and attribute rows differ in count");
  }
  if (meta_.size() != static_cast<std::size_t>(attrs_.cols())) {
    throw DimensionError("dataset: attribute metadata does not match d");
  }
  if (!attrs_.allFinite()) throw ValidationError("dataset: non-finite attribute value");

  by_id_.resize(ids_.size());
  std::iota(by_id_.begin(), by_id_.end(), 0u);
  std::sort(by_id_.begin(), by_id_.end(),
            [&](std::uint32_t a, std::uint32_t b) { return ids_[a] < ids_[b]; });
  id_rank_.resize(ids_.size());
  for (std::size_t r = 0; r < by_id_.size(); ++r) {
    if (r > 0 && ids_[by_id_[r]] == ids_[by_id_[r - 1]]) {
      throw ValidationError("duplicate id '" + ids_[by_id_[r]] + "'");
    }
    id_rank_[by_id_[r]] = static_cast<std::uint32_t>(r);
  }
}

Dataset::Dataset(std::vector<std::string> ids, Matrix attrs)
    : Dataset(std::move(ids), attrs, [&] {
        std::vector<AttributeMeta> meta(static_cast<std::size_t>(attrs.cols()));
        for (std::size_t j = 0; j < meta.size(); ++j) {
          meta[j].name = "x" + std::to_string(j + 1);
          if (attrs.rows() > 0) {
            meta[j].raw_min = attrs.col(static_cast<Eigen::Index>(j)).minCoeff();
            meta[j].raw_max = attrs.col(static_cast<Eigen::Index>(j)).maxCoeff();
          }
        }
        return meta;
      }()) {}

std::optional<std::size_t> Dataset::find(std::string_view id) const {
  auto it = std::lower_bound(by_id_.begin(), by_id_.end(), id,
                             [&](std::uint32_t a, std::string_view key) { return ids_[a] < key; });
  if (it == by_id_.end() || ids_[*it] != id) return std::nullopt;
  return *it;
}

std::size_t Dataset::index_of(std::string_view id) const {
  auto found = find(id);
  if (!found) throw ValidationError("unknown item id '" + std::string(id) + "'");
  return *found;
}

std::vector<std::string> Ranking::ids(const Dataset& data) const {
  std::vector<std::string> out;
  out.reserve(order.size());
  for (auto i : order) out.push_back(data.id(i));
  return out;
}

Ranking Ranking::from_ids(const Dataset& data, const std::vector<std::string>& ids) {
  if (ids.size() != data.size()) {
    throw ValidationError("ranking must list all " + std::to_string(data.size()) + " items");
  }
  Ranking r;
  std::vector<bool> seen(data.size(), false);
  for (const auto& id : ids) {
    std::size_t i = data.index_of(id);
    if (seen[i]) throw ValidationError("ranking lists '" + id + "' twice");
    seen[i] = true;
    r.order.push_back(i);
  }
  return r;
}

HomogeneousConstraint HomogeneousConstraint::parse(std::string_view text) {
  static constexpr std::pair<std::string_view, Relation> kOps[] = {
      {"<=", Relation::le}, {">=", Relation::ge}, {"<", Relation::lt}, {">", Relation::gt}};
  for (auto [op, rel] : kOps) {
    auto pos = text.find(op);
    if (pos == std::string_view::npos) continue;
    auto rhs = parse_double(text.substr(pos + op.size()));
    if (!rhs || *rhs != 0.0) throw ValidationError("constraint right-hand side must be 0");
    std::vector<double> coeffs;
    std::string_view lhs = text.substr(0, pos);
    while (!lhs.empty()) {
      auto comma = lhs.find(',');
      auto v = parse_double(lhs.substr(0, comma));
      if (!v) throw ValidationError("bad constraint coefficient in '" + std::string(text) + "'");
      coeffs.push_back(*v);
      if (comma == std::string_view::npos) break;
      lhs.remove_prefix(comma + 1);
    }
    HomogeneousConstraint c;
    c.coeffs = Eigen::Map<Vector>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
    c.relation = rel;
    return c;
  }
  throw ValidationError("constraint needs one of <=, <, >=, >: '" + std::string(text) + "'");
}

Vector HomogeneousConstraint::as_ge() const {
  return (relation == Relation::ge || relation == Relation::gt) ? coeffs : Vector(-coeffs);
}

bool HomogeneousConstraint::satisfied(const Vector& w) const {
  double v = coeffs.dot(w);
  switch (relation) {
    case Relation::le: return v <= 0.0;
    case Relation::lt: return v < 0.0;
    case Relation::ge: return v >= 0.0;
    case Relation::gt: return v > 0.0;
  }
  return false;
}

RegionOfInterest RegionOfInterest::full(std::size_t dim) {
  if (dim < 2) throw ValidationError("region of interest needs d >= 2");
  RegionOfInterest roi;
  roi.kind_ = Kind::full;
  roi.dim_ = dim;
  return roi;
}

RegionOfInterest RegionOfInterest::cone(const Vector& ray, double max_angle) {
  if (ray.size() < 2) throw ValidationError("cone ray needs d >= 2");
  if ((ray.array() < 0.0).any() || ray.squaredNorm() == 0.0) {
    throw ValidationError("cone ray must be non-negative and nonzero");
  }
  if (!(max_angle > 0.0 && max_angle <= kHalfPi)) {
    throw ValidationError("cone angle must lie in (0, pi/2]");
  }
  RegionOfInterest roi;
  roi.kind_ = Kind::cone;
  roi.dim_ = static_cast<std::size_t>(ray.size());
  roi.ray_ = ray.normalized();
  roi.max_angle_ = max_angle;
  return roi;
}

RegionOfInterest RegionOfInterest::constraints(std::vector<HomogeneousConstraint> cs) {
  if (cs.empty()) throw ValidationError("constraint region needs at least one constraint");
  const auto d = static_cast<std::size_t>(cs.front().coeffs.size());
  if (d < 2) throw ValidationError("constraints need d >= 2");
  for (const auto& c : cs) {
    if (static_cast<std::size_t>(c.coeffs.size()) != d) {
      throw DimensionError("constraints disagree on dimension");
    }
  }
  RegionOfInterest roi;
  roi.kind_ = Kind::constraints;
  roi.dim_ = d;
  roi.constraints_ = std::move(cs);
  if (!interior_point({}, {}, roi)) {
    throw ValidationError("constraints leave no interior in the positive quadrant");
  }
  return roi;
}

bool RegionOfInterest::contains(const Vector& w) const {
  switch (kind_) {
    case Kind::full:
      return true;
    case Kind::cone:
      return angle_between(w, ray_) <= max_angle_;
    case Kind::constraints:
      return std::all_of(constraints_.begin(), constraints_.end(),
                         [&](const HomogeneousConstraint& c) { return c.satisfied(w); });
  }
  return false;
}

Dataset load_dataset(std::istream& in, const Schema& schema) {
  std::vector<std::string> header;
  if (!csv::read_record(in, header)) throw ParseError(0, "empty input, expected a header row");
  for (auto& h : header) h = std::string(trim(h));

  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(0, "missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  if (schema.attributes.size() < 2) throw ValidationError("need at least 2 scoring attributes");
  const std::size_t id_col = column(schema.id_column);
  std::vector<std::size_t> cols;
  for (const auto& a : schema.attributes) cols.push_back(column(a.source));

  std::vector<std::string> ids;
  std::vector<double> raw;
  std::vector<std::string> fields;
  std::unordered_set<std::string> seen;
  std::size_t row = 0;
  while (csv::read_record(in, fields)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    ++row;
    if (fields.size() != header.size()) {
      throw ParseError(row, "expected " + std::to_string(header.size()) + " fields, got " +
                                std::to_string(fields.size()));
    }
    ids.emplace_back(trim(fields[id_col]));
    if (ids.back().empty()) throw ParseError(row, "empty id");
    if (!seen.insert(ids.back()).second) throw ParseError(row, "duplicate id '" + ids.back() + "'");
    for (std::size_t j = 0; j < cols.size(); ++j) {
      auto v = parse_double(fields[cols[j]]);
      if (!v) {
        throw ParseError(row, "non-numeric value '" + fields[cols[j]] + "' in column '" +
                                  header[cols[j]] + "'");
      }
      raw.push_back(apply(schema.attributes[j].transform, *v, row, header[cols[j]]));
    }
  }
  if (ids.empty()) throw ValidationError("dataset has no rows");

  const auto n = static_cast<Eigen::Index>(ids.size());
  const auto d = static_cast<Eigen::Index>(cols.size());
  Matrix values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      raw.data(), n, d);
  std::vector<AttributeMeta> meta(cols.size());
  Matrix attrs(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    auto& m = meta[static_cast<std::size_t>(j)];
    m.name = schema.attributes[static_cast<std::size_t>(j)].name;
    m.direction = schema.attributes[static_cast<std::size_t>(j)].direction;
    m.raw_min = values.col(j).minCoeff();
    m.raw_max = values.col(j).maxCoeff();
    const double span = m.raw_max - m.raw_min;
    if (!schema.normalize) {
      if (m.raw_min < 0.0 || m.raw_max > 1.0) {
        throw ValidationError("column '" + m.name + "' leaves [0, 1]; it needs normalization");
      }
      if (m.direction == Direction::higher_preferred) {
        attrs.col(j) = values.col(j);
      } else {
        attrs.col(j) = 1.0 - values.col(j).array();
      }
    } else if (span == 0.0) {
      attrs.col(j).setConstant(0.5);
    } else if (m.direction == Direction::higher_preferred) {
      attrs.col(j) = (values.col(j).array() - m.raw_min) / span;
    } else {
      attrs.col(j) = (m.raw_max - values.col(j).array()) / span;
    }
  }
  return Dataset(std::move(ids), std::move(attrs), std::move(meta));
}

Dataset load_dataset_file(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return load_dataset(in, schema);
}

Vector scores(const Dataset& data, const Vector& w) {
  if (static_cast<std::size_t>(w.size()) != data.dim()) {
    throw DimensionError("weight vector has " + std::to_string(w.size()) + " components, dataset d = " +
                         std::to_string(data.dim()));
  }
  return data.attrs() * w;
}

namespace {

struct ScoreOrder {
  const Vector& s;
  const Dataset& data;
  bool operator()(std::size_t a, std::size_t b) const {
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    if (s(ia) != s(ib)) return s(ia) > s(ib);
    return data.id_rank(a) < data.id_rank(b);
  }
};

}  // namespace

std::vector<std::size_t> check_permutation(const Dataset& data, const Ranking& ranking) {
  if (ranking.order.size() != data.size()) {
    throw ValidationError("ranking has " + std::to_string(ranking.order.size()) + " items, dataset has " +
                          std::to_string(data.size()));
  }
  std::vector<std::size_t> pos(data.size(), data.size());
  for (std::size_t p = 0; p < ranking.order.size(); ++p) {
    const std::size_t i = ranking.order[p];
    if (i >= data.size() || pos[i] != data.size()) throw ValidationError("ranking is not a permutation");
    pos[i] = p;
  }
  return pos;
}

Ranking rank(const Dataset& data, const Vector& w) {
  const Vector s = scores(data, w);
  Ranking r;
  r.order.resize(data.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::sort(r.order.begin(), r.order.end(), ScoreOrder{s, data});
  return r;
}

namespace {

void canonicalize(const Dataset& data, TopKResult& out) {
  if (out.mode == TopKMode::set) {
    std::sort(out.members.begin(), out.members.end(),
              [&](std::size_t a, std::size_t b) { return data.id_rank(a) < data.id_rank(b); });
  }
}

void check_k(const Dataset& data, std::size_t k) {
  if (k < 1 || k > data.size()) {
    throw ValidationError("k must lie in [1, " + std::to_string(data.size()) + "]");
  }
}

}  // namespace

TopKResult top_k(const Dataset& data, const Ranking& ranking, std::size_t k, TopKMode mode) {
  check_k(data, k);
  if (ranking.order.size() != data.size()) throw DimensionError("ranking length differs from n");
  TopKResult out{mode, k, {ranking.order.begin(), ranking.order.begin() + static_cast<std::ptrdiff_t>(k)}};
  canonicalize(data, out);
  return out;
}

TopKResult top_k(const Dataset& data, const Vector& w, std::size_t k, TopKMode mode) {
  check_k(data, k);
  const Vector s = scores(data, w);
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    ScoreOrder{s, data});
  idx.resize(k);
  TopKResult out{mode, k, std::move(idx)};
  canonicalize(data, out);
  return out;
}

Distribution parse_distribution(std::string_view name) {
  if (name == "independent") return Distribution::independent;
  if (name == "correlated") return Distribution::correlated;
  if (name == "anti_correlated" || name == "anti-correlated" || name == "anticorrelated") {
    return Distribution::anti_correlated;
  }
  throw ValidationError("unknown distribution '" + std::string(name) + "'");
}

namespace {

// Generator from the classic skyline benchmark: peaks are means of uniform
// draws, "normal" values are peaks of 12 uniforms.
class SkylineGenerator {
 public:
  explicit SkylineGenerator(std::uint64_t seed) : rng_(seed) {}

  double equal(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double peak(double lo, double hi, std::size_t dim) {
    double sum = 0.0;
    for (std::size_t i = 0; i < dim; ++i) sum += equal(0.0, 1.0);
    return sum / static_cast<double>(dim) * (hi - lo) + lo;
  }
  double normal(double med, double var) { return peak(med - var, med + var, 12); }

  void independent(Eigen::Ref<Vector> x) {
    for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = equal(0.0, 1.0);
  }

  void correlated(Eigen::Ref<Vector> x) {
    const auto d = x.size();
    do {
      const double v = peak(0.0, 1.0, static_cast<std::size_t>(d));
      x.setConstant(v);
      const double l = v <= 0.5 ? v : 1.0 - v;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double h = normal(0.0, l);
        x(j) += h;
        x((j + 1) % d) -= h;
      }
    } while (!in_unit_box(x));
  }

  void anti_correlated(Eigen::Ref<Vector> x) {
    const auto d = x.size();
    do {
      const double v = normal(0.5, 0.25);
      x.setConstant(v);
      const double l = v <= 0.5 ? v : 1.0 - v;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double h = equal(-l, l);
        x(j) += h;
        x((j + 1) % d) -= h;
      }
    } while (!in_unit_box(x));
  }

 private:
  static bool in_unit_box(const Eigen::Ref<Vector>& x) {
    return (x.array() >= 0.0).all() && (x.array() <= 1.0).all();
  }

  std::mt19937_64 rng_;
};

}  // namespace

Dataset generate_synthetic(std::size_t n, std::size_t d, Distribution mode, std::uint64_t seed) {
  if (n < 1) throw ValidationError("n must be >= 1");
  if (d < 2) throw ValidationError("d must be >= 2");
  SkylineGenerator gen(seed);
  Matrix attrs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Vector x(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < attrs.rows(); ++i) {
    switch (mode) {
      case Distribution::independent: gen.independent(x); break;
      case Distribution::correlated: gen.correlated(x); break;
      case Distribution::anti_correlated: gen.anti_correlated(x); break;
    }
    attrs.row(i) = x.transpose();
  }
  const int width = static_cast<int>(std::to_string(n).size());
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string num = std::to_string(i + 1);
    ids.push_back("t" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num);
  }
  std::vector<AttributeMeta> meta(d);
  for (std::size_t j = 0; j < d; ++j) meta[j] = {"x" + std::to_string(j + 1), Direction::higher_preferred, 0.0, 1.0};
  return Dataset(std::move(ids), std::move(attrs), std::move(meta));
}

void write_csv(std::ostream& out, const Dataset& data) {
  out << "id";
  for (const auto& m : data.meta()) out << ',' << csv::quote(m.name);
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << csv::quote(data.id(i));
    for (std::size_t j = 0; j < data.dim(); ++j) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf,
                                     data.attrs()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      out << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
}

}  // namespace stablerank
