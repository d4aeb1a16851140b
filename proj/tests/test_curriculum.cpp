#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "pgps/curriculum.hpp"
#include "pgps/errors.hpp"
#include "pgps/rng.hpp"

using namespace pgps;

namespace {

// Independent re-derivation of the backward batch chain, kept deliberately
// separate from the library loop.
std::vector<std::uint64_t> chain_reference(
    const std::vector<std::uint64_t>& voxels, std::uint64_t default_batch) {
  const std::uint64_t cap = std::max<std::uint64_t>(24, default_batch);
  std::vector<std::uint64_t> batches(voxels.size(), default_batch);
  for (std::size_t k = voxels.size() - 1; k-- > 0;) {
    const unsigned __int128 budget =
        static_cast<unsigned __int128>(batches[k + 1]) * voxels[k + 1];
    const auto grown = static_cast<std::uint64_t>(budget / voxels[k]);
    batches[k] = std::min(std::max(grown, default_batch), cap);
  }
  return batches;
}

ArchitectureSpec toy_lung() {
  return {"toy-lung", {2, 3, 3}, PatchSize3D{{8, 8, 8}}};
}

ArchitectureSpec lung() { return {"lung", {4, 5, 5}, std::nullopt}; }

}  // namespace

TEST_SUITE("curriculum") {

TEST_CASE("scheme names round trip") {
  for (Scheme s : {Scheme::cps, Scheme::pgps, Scheme::pgps_plus, Scheme::rpss})
    CHECK(scheme_from_name(scheme_name(s)) == s);
  CHECK(scheme_name(Scheme::pgps_plus) == "pgps+");
  CHECK_THROWS_AS(scheme_from_name("sgd"), config_error);
}

TEST_CASE("the shrunk lung ladder comes out stage by stage") {
  const std::vector<PatchSize3D> expected = {
      {{8, 8, 8}},    {{8, 16, 8}},   {{8, 16, 16}},  {{12, 16, 16}},
      {{12, 24, 16}}, {{12, 24, 24}}, {{16, 24, 24}}, {{16, 32, 24}},
      {{16, 32, 32}}, {{20, 32, 32}}, {{20, 40, 32}}, {{20, 40, 40}},
      {{20, 48, 40}}};
  const auto got = generate_stages(PatchSize3D{{8, 8, 8}},
                                   PatchSize3D{{20, 48, 40}}, {4, 8, 8});
  REQUIRE(got.size() == expected.size());
  for (std::size_t k = 0; k < got.size(); ++k) CHECK(got[k] == expected[k]);
}

TEST_CASE("stage ladders always grow one axis by one step") {
  RngStream rng{404, stream_id("ladder_prop"), 0};
  for (int trial = 0; trial < 200; ++trial) {
    std::array<std::uint64_t, 3> steps{};
    PatchSize3D lo, hi;
    std::uint64_t total_increments = 0;
    for (int axis = 0; axis < 3; ++axis) {
      steps[axis] = std::uint64_t{1} << rng.next_below(5);
      lo[axis] = steps[axis] * (1 + rng.next_below(3));
      const std::uint64_t increments = rng.next_below(5);
      hi[axis] = lo[axis] + steps[axis] * increments;
      total_increments += increments;
    }
    const auto stages = generate_stages(lo, hi, steps);
    REQUIRE(stages.size() == 1 + total_increments);
    CHECK(stages.front() == lo);
    CHECK(stages.back() == hi);
    for (std::size_t k = 0; k + 1 < stages.size(); ++k) {
      int changed = 0;
      for (int axis = 0; axis < 3; ++axis) {
        const std::uint64_t a = stages[k][axis], b = stages[k + 1][axis];
        if (a == b) continue;
        ++changed;
        CHECK(b == a + steps[axis]);
      }
      CHECK(changed == 1);
    }
  }
}

TEST_CASE("bad spans are rejected with the axis named") {
  CHECK_THROWS_WITH_AS(
      generate_stages(PatchSize3D{{8, 8, 8}}, PatchSize3D{{20, 48, 41}},
                      {4, 8, 8}),
      "axis 2: span 33 is not divisible by step 8", schedule_error);
  CHECK_THROWS_WITH_AS(
      generate_stages(PatchSize3D{{8, 8, 8}}, PatchSize3D{{20, 48, 40}},
                      {4, 0, 8}),
      "axis 1 has zero step", schedule_error);
  CHECK_THROWS_WITH_AS(
      generate_stages(PatchSize3D{{32, 8, 8}}, PatchSize3D{{20, 48, 40}},
                      {4, 8, 8}),
      "axis 0: max patch below min patch", schedule_error);
}

TEST_CASE("batch growth reproduces the full-scale chain") {
  const auto stages = generate_stages(PatchSize3D{{32, 32, 32}},
                                      PatchSize3D{{80, 192, 160}},
                                      {16, 32, 32});
  REQUIRE(stages.size() == 13);
  std::vector<std::uint64_t> voxels(stages.size());
  std::transform(stages.begin(), stages.end(), voxels.begin(),
                 [](const PatchSize3D& p) { return p.voxel_count(); });

  const auto batches = plan_pgps_plus_batches(voxels, 2);
  const std::vector<std::uint64_t> expected = {24, 12, 6, 4, 3, 2, 2,
                                               2,  2,  2, 2, 2, 2};
  CHECK(batches == expected);
  CHECK(batches == chain_reference(voxels, 2));
}

TEST_CASE("batch growth properties hold on random ladders") {
  RngStream rng{13, stream_id("batch_prop"), 0};
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.next_below(12);
    std::vector<std::uint64_t> voxels(n);
    std::uint64_t v = 64 + rng.next_below(512);
    for (auto& entry : voxels) {
      entry = v;
      v += 1 + rng.next_below(4096);  // strictly growing
    }
    const std::uint64_t default_batch = 1 + rng.next_below(4);
    const auto batches = plan_pgps_plus_batches(voxels, default_batch);
    CHECK(batches == chain_reference(voxels, default_batch));
    CHECK(batches.back() == default_batch);
    const std::uint64_t cap = std::max<std::uint64_t>(24, default_batch);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(batches[k] >= default_batch);
      CHECK(batches[k] <= cap);
      if (k + 1 < n) CHECK(batches[k] >= batches[k + 1]);  // larger patches, never larger batches
    }
  }
}

TEST_CASE("constant-batch planning and its guards") {
  CHECK(plan_pgps_batches(4, 3) == std::vector<std::uint64_t>{3, 3, 3, 3});
  CHECK_THROWS_AS(plan_pgps_batches(0, 2), schedule_error);
  CHECK_THROWS_AS(plan_pgps_batches(3, 0), schedule_error);
  CHECK_THROWS_AS(plan_pgps_plus_batches(std::vector<std::uint64_t>{}, 2),
                  schedule_error);
}

TEST_CASE("epochs split evenly with the remainder on the last stage") {
  const auto thousand = allocate_epochs(1000, 13);
  REQUIRE(thousand.size() == 13);
  for (std::size_t k = 0; k + 1 < thousand.size(); ++k)
    CHECK(thousand[k] == 76);
  CHECK(thousand.back() == 88);
  CHECK(std::accumulate(thousand.begin(), thousand.end(),
                        std::uint64_t{0}) == 1000);

  CHECK(allocate_epochs(1000, 1) == std::vector<std::uint64_t>{1000});
  CHECK(allocate_epochs(0, 3) == std::vector<std::uint64_t>{0, 0, 0});
  const auto sparse = allocate_epochs(5, 13);
  CHECK(std::accumulate(sparse.begin(), sparse.end(), std::uint64_t{0}) == 5);
  CHECK(sparse.back() == 5);
  CHECK_THROWS_AS(allocate_epochs(10, 0), schedule_error);
}

TEST_CASE("build_plan wires patches, batches and epochs together") {
  const CurriculumPlan plan = build_plan(lung(), PatchSize3D{{80, 192, 160}},
                                         Scheme::pgps_plus, 2, 1000, 250);
  REQUIRE(plan.stages.size() == 13);
  CHECK(plan.stages.front().patch == PatchSize3D{{32, 32, 32}});
  CHECK(plan.stages.front().batch == 24);
  CHECK(plan.stages.back().patch == PatchSize3D{{80, 192, 160}});
  CHECK(plan.stages.back().batch == 2);
  CHECK(plan.stages.back().epochs == 88);
  CHECK_NOTHROW(validate_plan(plan));
  ArchitectureSpec spec = lung();
  CHECK_NOTHROW(validate_plan(plan, &spec));

  const CurriculumPlan cps = build_plan(lung(), PatchSize3D{{80, 192, 160}},
                                        Scheme::cps, 2, 1000, 250);
  REQUIRE(cps.stages.size() == 1);
  CHECK(cps.stages[0].patch == PatchSize3D{{80, 192, 160}});
  CHECK(cps.stages[0].epochs == 1000);

  const CurriculumPlan rpss = build_plan(lung(), PatchSize3D{{80, 192, 160}},
                                         Scheme::rpss, 2, 1000, 250);
  CHECK(rpss.scheme == Scheme::rpss);
  CHECK(rpss.stages.size() == 13);  // same ladder, random stage draw happens later
  for (const Stage& s : rpss.stages) CHECK(s.batch == 2);
}

TEST_CASE("build_plan rejects illegal maxima and zero iteration budgets") {
  CHECK_THROWS_AS(build_plan(lung(), PatchSize3D{{81, 192, 160}}, Scheme::pgps,
                             2, 1000, 250),
                  schedule_error);
  CHECK_THROWS_AS(build_plan(lung(), PatchSize3D{{80, 192, 160}}, Scheme::pgps,
                             2, 1000, 0),
                  schedule_error);
}

TEST_CASE("voxel totals agree with a by-hand ledger") {
  const CurriculumPlan plan = build_plan(lung(), PatchSize3D{{80, 192, 160}},
                                         Scheme::pgps, 2, 1000, 250);
  const CurriculumPlan base = build_plan(lung(), PatchSize3D{{80, 192, 160}},
                                         Scheme::cps, 2, 1000, 250);

  unsigned __int128 plan_total = 0;
  for (const Stage& s : plan.stages)
    plan_total += static_cast<unsigned __int128>(s.batch) *
                  s.patch.voxel_count() * s.epochs * 250;
  CHECK(total_tensor_voxels(plan) == plan_total);

  const unsigned __int128 base_total =
      static_cast<unsigned __int128>(2) * 2457600 * 1000 * 250;
  CHECK(total_tensor_voxels(base) == base_total);

  const double fraction = voxels_shown_fraction(plan, base);
  CHECK(fraction ==
        doctest::Approx(static_cast<double>(plan_total) /
                        static_cast<double>(base_total)).epsilon(1e-14));
  CHECK(fraction == doctest::Approx(0.3534933333333333).epsilon(1e-13));

  const CurriculumPlan plus = build_plan(lung(), PatchSize3D{{80, 192, 160}},
                                         Scheme::pgps_plus, 2, 1000, 250);
  CHECK(voxels_shown_fraction(plus, base) ==
        doctest::Approx(0.39352).epsilon(1e-13));
}

TEST_CASE("a zero-voxel baseline cannot be a denominator") {
  CurriculumPlan base = build_plan(lung(), PatchSize3D{{80, 192, 160}},
                                   Scheme::cps, 2, 0, 250);
  const CurriculumPlan plan = build_plan(lung(), PatchSize3D{{80, 192, 160}},
                                         Scheme::pgps, 2, 1000, 250);
  CHECK_THROWS_AS(voxels_shown_fraction(plan, base), accounting_error);
}

TEST_CASE("validate_plan catches structural tampering") {
  const ArchitectureSpec spec = toy_lung();
  CurriculumPlan plan = build_plan(spec, PatchSize3D{{20, 48, 40}},
                                   Scheme::pgps, 2, 26, 10);

  SUBCASE("two axes changed at once") {
    plan.stages[1].patch = PatchSize3D{{12, 16, 16}};
    CHECK_THROWS_WITH_AS(validate_plan(plan),
                         "stages 1->2 change more than one axis",
                         schedule_error);
  }
  SUBCASE("epoch budget broken") {
    plan.stages[3].epochs += 1;
    CHECK_THROWS_WITH_AS(validate_plan(plan), "stage epochs sum to 27, expected 26",
                         schedule_error);
  }
  SUBCASE("shrinking patch") {
    std::swap(plan.stages[0], plan.stages[1]);
    CHECK_THROWS_AS(validate_plan(plan), schedule_error);
  }
  SUBCASE("duplicate stage") {
    plan.stages[1] = plan.stages[0];
    CHECK_THROWS_WITH_AS(validate_plan(plan),
                         "consecutive stages have identical patch sizes",
                         schedule_error);
  }
  SUBCASE("double step against the architecture") {
    CurriculumPlan two;
    two.scheme = Scheme::pgps;
    two.default_batch = 2;
    two.iterations_per_epoch = 10;
    two.total_epochs = 4;
    two.stages = {Stage{PatchSize3D{{8, 8, 8}}, 2, 2},
                  Stage{PatchSize3D{{8, 24, 8}}, 2, 2}};
    CHECK_NOTHROW(validate_plan(two));  // structurally fine without the arch
    ArchitectureSpec arch = spec;
    CHECK_THROWS_WITH_AS(validate_plan(two, &arch),
                         "stages 1->2 grow axis 1 by 16, expected one step of 8",
                         schedule_error);
  }
  SUBCASE("zero batch") {
    plan.stages[4].batch = 0;
    CHECK_THROWS_AS(validate_plan(plan), schedule_error);
  }
  SUBCASE("cps with a ladder") {
    plan.scheme = Scheme::cps;
    CHECK_THROWS_WITH_AS(validate_plan(plan),
                         "cps plan must have exactly one stage",
                         schedule_error);
  }
}

TEST_CASE("plans survive a json round trip byte for byte") {
  const CurriculumPlan plan = build_plan(toy_lung(), PatchSize3D{{20, 48, 40}},
                                         Scheme::pgps_plus, 2, 26, 10);
  const nlohmann::json j = to_json(plan);
  const CurriculumPlan back = plan_from_json(j);
  CHECK(back == plan);
  CHECK(to_json(back).dump() == j.dump());
}

TEST_CASE("malformed plan documents are rejected as configuration errors") {
  CHECK_THROWS_AS(plan_from_json(nlohmann::json::object()), config_error);
  nlohmann::json j = to_json(build_plan(toy_lung(), PatchSize3D{{20, 48, 40}},
                                        Scheme::pgps, 2, 26, 10));
  j["stages"][0]["patch"] = {8, 8};
  CHECK_THROWS_AS(plan_from_json(j), config_error);
  nlohmann::json tampered = to_json(
      build_plan(toy_lung(), PatchSize3D{{20, 48, 40}}, Scheme::pgps, 2, 26, 10));
  tampered["total_epochs"] = 27;  // breaks the epoch budget during validation
  CHECK_THROWS_AS(plan_from_json(tampered), schedule_error);
}

}  // TEST_SUITE
