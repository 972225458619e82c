#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "kvf/catalog.hpp"
#include "kvf/errors.hpp"
#include "kvf/frame.hpp"
#include "kvf/minimality.hpp"
#include "kvf/sampling.hpp"

using kvf::adapted_frame_from;
using kvf::AdaptedFrame;
using kvf::geometry_at;
using kvf::GeometryAtPoint;
using kvf::ManifoldDefinition;

TEST_CASE("catalog enumerates the five benchmark manifolds") {
  const auto& entries = kvf::catalog_entries();
  REQUIRE(entries.size() == 5);
  std::set<std::string> names;
  for (const auto& e : entries) {
    names.insert(e.name);
    CHECK_FALSE(e.summary.empty());
    CHECK(kvf::is_catalog_name(e.name));
  }
  CHECK(names == std::set<std::string>{"euclidean_parallel", "hopf_s3", "heisenberg",
                                       "twisted_r3", "product_s3_r2"});
  CHECK_FALSE(kvf::is_catalog_name("nope"));
  CHECK_THROWS_AS(kvf::catalog_entry("nope"), kvf::UnknownNameError);
  CHECK_THROWS_AS(kvf::builtin("nope"), kvf::UnknownNameError);
}

TEST_CASE("twisted manifold parameter handling") {
  CHECK_THROWS_AS(kvf::builtin("twisted_r3", {{"a", 150.0}}), kvf::ParameterRangeError);
  CHECK_THROWS_AS(kvf::builtin("twisted_r3", {{"b", 1.0}}), kvf::UnknownNameError);
  CHECK_THROWS_AS(kvf::builtin("euclidean_parallel", {{"a", 1.0}}), kvf::UnknownNameError);

  // doubling the twist doubles the rotation speed: lambda = a x / 2
  const ManifoldDefinition def = kvf::builtin("twisted_r3", {{"a", 2.0}});
  Eigen::VectorXd x(3);
  x << 0.5, 0.5, 0.0;
  const GeometryAtPoint geo = geometry_at(def, x);
  const AdaptedFrame fr = adapted_frame_from(def, geo, {});
  CHECK(fr.lambdas[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("every entry is unit Killing with an adapted frame on its whole grid") {
  for (const auto& entry : kvf::catalog_entries()) {
    CAPTURE(entry.name);
    const ManifoldDefinition def = kvf::builtin(entry.name);
    double worst_unit = 0.0, worst_killing = 0.0;
    for (const Eigen::VectorXd& x : kvf::grid_points(def)) {
      const GeometryAtPoint geo = geometry_at(def, x);
      worst_unit = std::max(worst_unit, std::abs(geo.V.dot(geo.g * geo.V) - 1.0));
      const Eigen::MatrixXd flat = geo.g * geo.nablaV;
      worst_killing = std::max(worst_killing, (flat + flat.transpose()).cwiseAbs().maxCoeff());
      const AdaptedFrame fr = adapted_frame_from(def, geo, {});
      CHECK(fr.n == def.dimension);
    }
    CHECK(worst_unit <= 1e-9);
    CHECK(worst_killing <= 1e-9);
  }
}

TEST_CASE("zero twist collapses to the flat parallel case") {
  const ManifoldDefinition def = kvf::builtin("twisted_r3", {{"a", 0.0}});
  const std::vector<Eigen::VectorXd> pts = kvf::grid_points(def);
  for (const Eigen::VectorXd& x : pts) {
    CHECK(kvf::operators_at(def, x).f == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(kvf::omega_frame_at(def, x).cwiseAbs().maxCoeff() <= 1e-12);
  }
  const kvf::MinimalityReport rep = kvf::compare_theorems(def, pts);
  CHECK(rep.minimal);
  CHECK(rep.max_residual_original <= 1e-12);
  CHECK(rep.max_residual_corrected <= 1e-12);
}

TEST_CASE("expected facts hold on samples") {
  for (const auto& entry : kvf::catalog_entries()) {
    CAPTURE(entry.name);
    const ManifoldDefinition def = kvf::builtin(entry.name);
    for (const Eigen::VectorXd& x : kvf::random_points(def, 5, 81)) {
      const GeometryAtPoint geo = geometry_at(def, x);
      if (entry.expected.lambda_const) {
        const AdaptedFrame fr = adapted_frame_from(def, geo, {});
        REQUIRE(fr.m >= 1);
        for (double lam : fr.lambdas)
          CHECK(lam == doctest::Approx(*entry.expected.lambda_const).epsilon(1e-9));
      }
      if (entry.expected.f_const)
        CHECK(kvf::operators_from(geo).f ==
              doctest::Approx(*entry.expected.f_const).epsilon(1e-9));
    }
    const kvf::MinimalityReport rep =
        kvf::compare_theorems(def, kvf::random_points(def, 10, 82));
    CHECK(rep.failed_points == 0);
    CHECK(rep.minimal == entry.expected.minimal);
  }
}
