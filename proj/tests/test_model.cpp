#include <doctest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "stablerank/model.hpp"

using namespace stablerank;

namespace {

Schema schema_xy(Direction dx = Direction::higher_preferred) {
  Schema s;
  s.id_column = "id";
  s.attributes = {{"x", "x", Transform::identity, dx}, {"y", "y", Transform::identity, Direction::higher_preferred}};
  return s;
}

Dataset parse(const std::string& text, const Schema& s) {
  std::istringstream in(text);
  return load_dataset(in, s);
}

double pearson(const Matrix& a, Eigen::Index i, Eigen::Index j) {
  const Vector x = a.col(i).array() - a.col(i).mean();
  const Vector y = a.col(j).array() - a.col(j).mean();
  return x.dot(y) / (x.norm() * y.norm());
}

}  // namespace

TEST_CASE("min-max normalization maps the column range onto [0, 1]") {
  auto d = parse("id,x,y\na,20,1\nb,10,2\nc,15,3\n", schema_xy());
  CHECK(d.item(0)(0) == doctest::Approx(1.0));
  CHECK(d.item(1)(0) == doctest::Approx(0.0));
  CHECK(d.item(2)(0) == doctest::Approx(0.5));
  CHECK(d.meta()[0].raw_min == 10.0);
  CHECK(d.meta()[0].raw_max == 20.0);
}

TEST_CASE("lower-preferred columns are flipped") {
  auto d = parse("id,x,y\na,20,1\nb,10,2\n", schema_xy(Direction::lower_preferred));
  CHECK(d.item(1)(0) == doctest::Approx(1.0));
  CHECK(d.item(0)(0) == doctest::Approx(0.0));
  CHECK(d.meta()[0].direction == Direction::lower_preferred);
}

TEST_CASE("a constant column maps to 0.5") {
  auto d = parse("id,x,y\na,7,1\nb,7,2\nc,7,3\n", schema_xy());
  for (std::size_t i = 0; i < 3; ++i) CHECK(d.item(i)(0) == 0.5);
}

TEST_CASE("normalizing normalized data changes nothing") {
  auto once = parse("id,x,y\na,0,1\nb,1,0\nc,0.25,0.5\n", schema_xy());
  std::ostringstream out;
  write_csv(out, once);
  auto twice = parse(out.str(), schema_xy());
  CHECK((once.attrs() - twice.attrs()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("input errors name the row") {
  try {
    parse("id,x,y\na,1,2\nb,oops,3\n", schema_xy());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
  }
  try {
    parse("id,x,y\na,1,2\na,2,3\n", schema_xy());
    FAIL("expected a duplicate id error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
  }
  CHECK_THROWS_AS(Dataset({"a", "a"}, Matrix::Ones(2, 2)), ValidationError);
  Schema one;
  one.id_column = "id";
  one.attributes = {AttributeSpec::parse("x:higher")};
  CHECK_THROWS_AS(parse("id,x\na,1\n", one), ValidationError);
  CHECK_THROWS_AS(parse("id,x,y\na,1\n", schema_xy()), ParseError);
}

TEST_CASE("derived columns apply their transform before normalization") {
  Schema s;
  s.id_column = "id";
  s.attributes = {AttributeSpec::parse("lx=log(x):higher"), AttributeSpec::parse("y:lower")};
  auto d = parse("id,x,y\na,1,0\nb,10,1\nc,100,2\n", s);
  CHECK(d.item(1)(0) == doctest::Approx(0.5));
  CHECK(d.meta()[0].name == "lx");
  CHECK(d.item(0)(1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(parse("id,x,y\na,-1,0\nb,10,1\n", s), ParseError);
}

TEST_CASE("raw mode keeps values that are already normalized") {
  Schema s = schema_xy();
  s.normalize = false;
  auto d = parse("id,x,y\na,0.63,0.71\nb,0.83,0.65\n", s);
  CHECK(d.item(0)(0) == 0.63);
  CHECK_THROWS_AS(parse("id,x,y\na,1.5,0.71\n", s), ValidationError);
}

TEST_CASE("rank sorts by score with ties to the smaller id") {
  auto d = fixtures::toy();
  CHECK(rank(d, Vector::Ones(2)).ids(d) == std::vector<std::string>{"t2", "t4", "t3", "t5", "t1"});
  CHECK(rank(d, Vector::Unit(2, 0)).ids(d) == std::vector<std::string>{"t2", "t4", "t1", "t3", "t5"});
  Dataset single({"t1"}, Matrix::Constant(1, 2, 0.3));
  CHECK(rank(single, Vector::Ones(2)).ids(single) == std::vector<std::string>{"t1"});
  Dataset tied({"b", "a"}, Matrix::Constant(2, 2, 0.5));
  CHECK(rank(tied, Vector::Ones(2)).ids(tied) == std::vector<std::string>{"a", "b"});
  CHECK_THROWS_AS(rank(d, Vector::Ones(3)), DimensionError);
}

TEST_CASE("rank is scale invariant and respects dominance") {
  auto d = generate_synthetic(200, 3, Distribution::independent, 4);
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vector w(3);
    w << u(gen), u(gen), u(gen);
    const Ranking r = rank(d, w);
    CHECK(r == rank(d, 7.5 * w));
    std::vector<std::size_t> pos(d.size());
    for (std::size_t p = 0; p < r.order.size(); ++p) pos[r.order[p]] = p;
    for (std::size_t i = 0; i < 40; ++i) {
      for (std::size_t j = 0; j < 40; ++j) {
        if (dominates(d.item(i), d.item(j))) CHECK(pos[i] < pos[j]);
      }
    }
  }
}

TEST_CASE("top_k prefixes and canonical sets") {
  auto d = fixtures::toy();
  const Ranking r = fixtures::ids(d, {"t2", "t4", "t3", "t5", "t1"});
  auto ranked = top_k(d, r, 2, TopKMode::ranked);
  CHECK(ranked.members == std::vector<std::size_t>{1, 3});
  auto set = top_k(d, fixtures::ids(d, {"t4", "t2", "t3", "t5", "t1"}), 2, TopKMode::set);
  CHECK(set.members == std::vector<std::size_t>{1, 3});
  CHECK(top_k(d, r, 5, TopKMode::ranked).members == r.order);
  CHECK_THROWS_AS(top_k(d, r, 0, TopKMode::ranked), ValidationError);
  CHECK_THROWS_AS(top_k(d, r, 6, TopKMode::ranked), ValidationError);
  CHECK(top_k(d, Vector::Ones(2), 3, TopKMode::ranked).members == std::vector<std::size_t>{1, 3, 2});
}

TEST_CASE("synthetic data has the requested correlation") {
  auto ind = generate_synthetic(10000, 3, Distribution::independent, 1);
  auto cor = generate_synthetic(10000, 3, Distribution::correlated, 1);
  auto anti = generate_synthetic(10000, 3, Distribution::anti_correlated, 1);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = i + 1; j < 3; ++j) {
      CHECK(std::abs(pearson(ind.attrs(), i, j)) < 0.05);
      CHECK(pearson(cor.attrs(), i, j) > 0.5);
      CHECK(pearson(anti.attrs(), i, j) < 0.0);
    }
  }
  CHECK(ind.attrs().minCoeff() >= 0.0);
  CHECK(cor.attrs().maxCoeff() <= 1.0);
  CHECK(generate_synthetic(50, 2, Distribution::correlated, 5).attrs() ==
        generate_synthetic(50, 2, Distribution::correlated, 5).attrs());
  auto one = generate_synthetic(1, 2, Distribution::anti_correlated, 3);
  CHECK(one.size() == 1);
  CHECK_THROWS_AS(generate_synthetic(0, 2, Distribution::independent, 0), ValidationError);
  CHECK_THROWS_AS(generate_synthetic(5, 1, Distribution::independent, 0), ValidationError);
}

TEST_CASE("homogeneous constraints parse and test membership") {
  auto c = HomogeneousConstraint::parse("1,-1<=0");
  CHECK(c.relation == HomogeneousConstraint::Relation::le);
  Vector w(2);
  w << 0.2, 0.8;
  CHECK(c.satisfied(w));
  w << 0.8, 0.2;
  CHECK_FALSE(c.satisfied(w));
  CHECK(HomogeneousConstraint::parse("2,-1>0").relation == HomogeneousConstraint::Relation::gt);
  CHECK_THROWS(HomogeneousConstraint::parse("1,-1=0"));
  CHECK_THROWS_AS(RegionOfInterest::constraints({HomogeneousConstraint::parse("-1,-1>=0")}), ValidationError);
}

TEST_CASE("permutation check") {
  auto d = fixtures::toy();
  CHECK_THROWS_AS(check_permutation(d, Ranking{{0, 1, 2, 3}}), ValidationError);
  CHECK_THROWS_AS(check_permutation(d, Ranking{{0, 1, 2, 3, 3}}), ValidationError);
  CHECK_THROWS(Ranking::from_ids(d, {"t1", "t2", "t3", "t4", "zz"}));
}
