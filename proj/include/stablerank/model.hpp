#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace stablerank {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `row` is the 1-based data row (0 for the header).
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

enum class Direction { higher_preferred, lower_preferred };

struct AttributeMeta {
  std::string name;
  Direction direction = Direction::higher_preferred;
  double raw_min = 0.0;
  double raw_max = 1.0;
};

/// Unary transform applied to a source column to form a derived attribute.
enum class Transform { identity, log, log1p, sqrt };

struct AttributeSpec {
  std::string name;    // output attribute name
  std::string source;  // CSV column it is read from
  Transform transform = Transform::identity;
  Direction direction = Direction::higher_preferred;

  /// Parses `NAME:higher`, `NAME:lower` or `NAME=log(COL):higher`.
  static AttributeSpec parse(std::string_view text);
};

struct Schema {
  std::string id_column;
  std::vector<AttributeSpec> attributes;
  /// When false the values are taken as already normalized: they must lie
  /// in [0, 1] and lower-preferred columns become 1 - v.
  bool normalize = true;
};

/// n items with d normalized scoring attributes; immutable once built.
///
/// Items keep their input order. `id_rank(i)` is the position of item i in
/// lexicographic id order and is the global tie-break key.
class Dataset {
 public:
  Dataset(std::vector<std::string> ids, Matrix attrs,
          std::vector<AttributeMeta> meta);
  Dataset(std::vector<std::string> ids, Matrix attrs);

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(attrs_.cols()); }

  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::vector<std::string>& ids() const { return ids_; }
  const Matrix& attrs() const { return attrs_; }
  auto item(std::size_t i) const { return attrs_.row(static_cast<Eigen::Index>(i)); }
  const std::vector<AttributeMeta>& meta() const { return meta_; }
  std::uint32_t id_rank(std::size_t i) const { return id_rank_[i]; }

  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;

 private:
  std::vector<std::string> ids_;
  Matrix attrs_;
  std::vector<AttributeMeta> meta_;
  std::vector<std::uint32_t> id_rank_;
  std::vector<std::uint32_t> by_id_;  // item indices sorted by id
};

/// A permutation of item indices, highest score first.
struct Ranking {
  std::vector<std::size_t> order;

  bool operator==(const Ranking&) const = default;
  std::vector<std::string> ids(const Dataset& data) const;
  static Ranking from_ids(const Dataset& data, const std::vector<std::string>& ids);
};

/// Adjacent pair that makes a ranking impossible: `lower` dominates `upper`,
/// or the two are identical and out of id order.
struct InfeasiblePair {
  std::size_t upper = 0;
  std::size_t lower = 0;
};

/// A verification outcome: the region, or the pair that rules it out.
template <typename Region>
struct Verdict {
  std::optional<Region> region;
  std::optional<InfeasiblePair> violation;  // empty when the bounds crossed without one

  bool feasible() const { return region.has_value(); }
};

/// Positions of a permutation; throws ValidationError for anything else.
std::vector<std::size_t> check_permutation(const Dataset& data, const Ranking& ranking);

enum class TopKMode { set, ranked };

struct TopKResult {
  TopKMode mode = TopKMode::ranked;
  std::size_t k = 0;
  std::vector<std::size_t> members;  // id-sorted for `set`, ranked prefix otherwise

  bool operator==(const TopKResult&) const = default;
};

struct HomogeneousConstraint {
  enum class Relation { le, lt, ge, gt };
  Vector coeffs;
  Relation relation = Relation::ge;

  /// Parses `1,-1<=0` style text: coefficients, relation, zero.
  static HomogeneousConstraint parse(std::string_view text);
  /// Returns the constraint as `a.w >= 0` (strictness dropped).
  Vector as_ge() const;
  bool satisfied(const Vector& w) const;
};

/// The acceptable part of the weight space.
class RegionOfInterest {
 public:
  enum class Kind { full, cone, constraints };

  static RegionOfInterest full(std::size_t dim);
  static RegionOfInterest cone(const Vector& ray, double max_angle);
  /// Throws ValidationError when the constraints leave no interior in the
  /// positive quadrant.
  static RegionOfInterest constraints(std::vector<HomogeneousConstraint> cs);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  const Vector& ray() const { return ray_; }
  double max_angle() const { return max_angle_; }
  const std::vector<HomogeneousConstraint>& constraint_list() const { return constraints_; }

  /// Membership of a non-negative weight vector.
  bool contains(const Vector& w) const;

 private:
  Kind kind_ = Kind::full;
  std::size_t dim_ = 0;
  Vector ray_;  // unit length for cones
  double max_angle_ = 0.0;
  std::vector<HomogeneousConstraint> constraints_;
};

/// Min-max normalization of raw columns unless the schema opts out.
/// Constant columns map to 0.5.
Dataset load_dataset(std::istream& csv, const Schema& schema);
Dataset load_dataset_file(const std::string& path, const Schema& schema);

Vector scores(const Dataset& data, const Vector& w);
Ranking rank(const Dataset& data, const Vector& w);
TopKResult top_k(const Dataset& data, const Ranking& ranking, std::size_t k, TopKMode mode);
/// Top-k straight from the weights without sorting all n items.
TopKResult top_k(const Dataset& data, const Vector& w, std::size_t k, TopKMode mode);

enum class Distribution { independent, correlated, anti_correlated };
Distribution parse_distribution(std::string_view name);

/// Skyline-benchmark style generator; deterministic for a fixed seed.
Dataset generate_synthetic(std::size_t n, std::size_t d, Distribution mode,
                           std::uint64_t seed);

void write_csv(std::ostream& out, const Dataset& data);

}  // namespace stablerank
