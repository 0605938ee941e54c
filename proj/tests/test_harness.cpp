#include <doctest.h>

#include <set>

#include "locsim/errors.hpp"
#include "locsim/harness.hpp"

using namespace locsim;

namespace {

const ServiceRates kRates{1.0, 0.9, 0.5};

SweepPlan small_plan() {
  SweepPlan p;
  p.schedulers = {SchedulerKind::BalancedPandas, SchedulerKind::JsqMaxWeight};
  p.loads = {0.8};
  p.perturbations = {{0.0, Direction::Lower, PerturbationMode::Independent},
                     {0.2, Direction::Lower, PerturbationMode::Independent}};
  p.replications = 3;
  p.base.horizon = 500.0;
  p.master_seed = 42;
  return p;
}

SweepRow row(SchedulerKind s, double eps, int rep, double ct) {
  SweepRow r;
  r.scheduler = s;
  r.load = 0.9;
  r.perturbation = {eps, Direction::Lower, PerturbationMode::Independent};
  r.replication = rep;
  r.mean_completion_time = ct;
  r.tasks_completed = 10;
  return r;
}

}  // namespace

TEST_CASE("perturb examples") {
  Rng rng(1);
  const auto co = perturb(kRates, {0.3, Direction::Lower, PerturbationMode::CoScaled}, rng);
  CHECK(co.alpha_hat == doctest::Approx(0.7));
  CHECK(co.beta_hat == doctest::Approx(0.63));
  CHECK(co.gamma_hat == doctest::Approx(0.35));

  const auto skew = perturb(kRates, {0.1, Direction::Higher, PerturbationMode::SkewSlowTiers}, rng);
  CHECK(skew.alpha_hat == 1.0);
  CHECK(skew.beta_hat == doctest::Approx(0.99));
  CHECK(skew.gamma_hat == doctest::Approx(0.55));

  for (auto mode : {PerturbationMode::CoScaled, PerturbationMode::Independent, PerturbationMode::SkewSlowTiers})
    for (auto dir : {Direction::Lower, Direction::Higher}) {
      const auto e = perturb(kRates, {0.0, dir, mode}, rng);
      CHECK(e == EstimatedRates{1.0, 0.9, 0.5});
    }

  CHECK_THROWS((perturb(kRates, {1.0, Direction::Lower, PerturbationMode::CoScaled}, rng)));
  CHECK_THROWS((perturb(kRates, {-0.1, Direction::Lower, PerturbationMode::CoScaled}, rng)));
}

TEST_CASE("independent perturbation stays in its band and ignores direction") {
  Rng a(9), b(9);
  double lo = 2.0, hi = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const auto x = perturb(kRates, {0.3, Direction::Lower, PerturbationMode::Independent}, a);
    const auto y = perturb(kRates, {0.3, Direction::Higher, PerturbationMode::Independent}, b);
    REQUIRE(x == y);
    for (double f : {x.alpha_hat / 1.0, x.beta_hat / 0.9, x.gamma_hat / 0.5}) {
      REQUIRE(f >= 0.7);
      REQUIRE(f <= 1.3);
      lo = std::min(lo, f);
      hi = std::max(hi, f);
    }
  }
  CHECK(lo < 0.71);
  CHECK(hi > 1.29);
}

TEST_CASE("sweep cardinality and seeds") {
  SweepPlan p = small_plan();
  p.schedulers = {SchedulerKind::BalancedPandas};
  p.perturbations = {{0.1, Direction::Lower, PerturbationMode::Independent}};
  const auto result = run_sweep(p);
  REQUIRE(result.rows.size() == 3);
  std::set<std::uint64_t> seeds;
  for (const auto& r : result.rows) seeds.insert(r.seed);
  CHECK(seeds.size() == 3);

  // all coordinates feed the seed
  std::set<std::uint64_t> all;
  int n = 0;
  for (auto s : {SchedulerKind::BalancedPandas, SchedulerKind::JsqMaxWeight, SchedulerKind::Priority,
                 SchedulerKind::Fifo})
    for (double load : {0.5, 0.9, 0.95})
      for (double eps : {0.0, 0.05, 0.3})
        for (auto dir : {Direction::Lower, Direction::Higher})
          for (auto mode : {PerturbationMode::CoScaled, PerturbationMode::Independent})
            for (int rep = 0; rep < 5; ++rep, ++n) all.insert(cell_seed(7, s, load, {eps, dir, mode}, rep));
  CHECK(all.size() == static_cast<std::size_t>(n));
  CHECK(cell_seed(7, SchedulerKind::Fifo, 0.5, {}, 1) == cell_seed(7, SchedulerKind::Fifo, 0.5, {}, 1));
  CHECK(cell_seed(7, SchedulerKind::Fifo, 0.5, {}, 1) != cell_seed(8, SchedulerKind::Fifo, 0.5, {}, 1));
}

TEST_CASE("sweep is deterministic regardless of worker count") {
  const auto p = small_plan();
  const auto one = run_sweep(p, 1);
  const auto again = run_sweep(p, 1);
  const auto many = run_sweep(p, 4);
  CHECK(one == again);
  CHECK(one == many);
  CHECK(one.rows.size() == 12);
  for (const auto& r : one.rows) {
    CHECK_FALSE(r.error.has_value());
    CHECK(r.tasks_completed > 0);
  }
}

TEST_CASE("zero epsilon matches unperturbed estimates") {
  const auto p = small_plan();
  const auto arrivals = p.workload.at_load(p.base.topology, p.base.true_rates, 0.8);
  for (auto mode : {PerturbationMode::CoScaled, PerturbationMode::Independent, PerturbationMode::SkewSlowTiers}) {
    const PerturbationPlan zero{0.0, Direction::Higher, mode};
    const auto cfg = cell_config(p, arrivals, SchedulerKind::BalancedPandas, zero, 31);
    auto plain = cfg;
    plain.estimated = EstimatedRates{kRates.alpha, kRates.beta, kRates.gamma};
    CHECK(run(cfg).mean_completion_time == run(plain).mean_completion_time);
  }
}

TEST_CASE("co-scaled perturbation does not change same-seed results") {
  const auto p = small_plan();
  const auto arrivals = p.workload.at_load(p.base.topology, p.base.true_rates, 0.9);
  for (auto s : {SchedulerKind::BalancedPandas, SchedulerKind::JsqMaxWeight})
    for (double eps : {0.05, 0.3})
      for (auto dir : {Direction::Lower, Direction::Higher}) {
        const auto base = run(cell_config(p, arrivals, s, {0.0, dir, PerturbationMode::CoScaled}, 1234));
        const auto pert = run(cell_config(p, arrivals, s, {eps, dir, PerturbationMode::CoScaled}, 1234));
        CHECK(base == pert);
      }
}

TEST_CASE("a failing cell is recorded and the sweep continues") {
  SweepPlan p = small_plan();
  p.schedulers = {SchedulerKind::Fifo};
  p.perturbations = {{0.0, Direction::Lower, PerturbationMode::Independent}};
  p.replications = 2;
  p.base.service = {ServiceKind::Geometric, 2.5};
  p.base.true_rates = {1.5, 0.9, 0.5};  // local mean 2/3 is below one slot
  const auto result = run_sweep(p);
  REQUIRE(result.rows.size() == 2);
  for (const auto& r : result.rows) CHECK(r.error.has_value());
}

TEST_CASE("aggregate examples") {
  SweepResult single{{row(SchedulerKind::BalancedPandas, 0.0, 0, 3.0)}};
  const auto s = aggregate(single);
  REQUIRE(s.size() == 1);
  CHECK(s[0].mean == 3.0);
  CHECK_FALSE(s[0].ci_half_width.has_value());

  SweepResult flat{{row(SchedulerKind::BalancedPandas, 0.0, 0, 2.0), row(SchedulerKind::BalancedPandas, 0.0, 1, 2.0),
                    row(SchedulerKind::BalancedPandas, 0.0, 2, 2.0)}};
  const auto f = aggregate(flat);
  CHECK(f[0].mean == doctest::Approx(2.0));
  CHECK(f[0].stddev == doctest::Approx(0.0));

  SweepResult two{{row(SchedulerKind::BalancedPandas, 0.0, 0, 1.0), row(SchedulerKind::BalancedPandas, 0.0, 1, 3.0)}};
  const auto t = aggregate(two);
  CHECK(t[0].mean == doctest::Approx(2.0));
  REQUIRE(t[0].ci_half_width.has_value());
  CHECK(*t[0].ci_half_width == doctest::Approx(12.7062).epsilon(1e-4));

  auto flagged = two;
  flagged.rows[1].unstable = true;
  CHECK(aggregate(flagged)[0].any_unstable);
}

TEST_CASE("t critical values") {
  CHECK(t_critical_95(1) == doctest::Approx(12.7062).epsilon(1e-5));
  CHECK(t_critical_95(19) == doctest::Approx(2.0930).epsilon(1e-4));
  CHECK(t_critical_95(1000) == doctest::Approx(1.9623).epsilon(1e-4));
}

TEST_CASE("sensitivity examples") {
  SweepResult same{{row(SchedulerKind::JsqMaxWeight, 0.0, 0, 4.0), row(SchedulerKind::JsqMaxWeight, 0.3, 0, 4.0)}};
  auto s = sensitivity(same);
  REQUIRE(s.size() == 1);
  CHECK(s[0].degradation == doctest::Approx(0.0));

  SweepResult worse{{row(SchedulerKind::JsqMaxWeight, 0.0, 0, 4.0), row(SchedulerKind::JsqMaxWeight, 0.3, 0, 5.0)}};
  s = sensitivity(worse);
  REQUIRE(s.size() == 1);
  CHECK(s[0].degradation == doctest::Approx(0.25));
  CHECK_FALSE(s[0].ci_half_width.has_value());

  SweepResult orphan{{row(SchedulerKind::JsqMaxWeight, 0.3, 0, 5.0)}};
  CHECK_THROWS_AS(sensitivity(orphan), InputError);
  // baseline of another scheduler does not count
  SweepResult mismatched{{row(SchedulerKind::BalancedPandas, 0.0, 0, 4.0), row(SchedulerKind::JsqMaxWeight, 0.3, 0, 5.0)}};
  CHECK_THROWS_AS(sensitivity(mismatched), InputError);
}

TEST_CASE("sensitivity interval by the delta method") {
  SweepResult r;
  for (int i = 0; i < 4; ++i) {
    r.rows.push_back(row(SchedulerKind::BalancedPandas, 0.0, i, 4.0 + (i % 2 == 0 ? -0.5 : 0.5)));
    r.rows.push_back(row(SchedulerKind::BalancedPandas, 0.3, i, 5.0 + (i % 2 == 0 ? -1.0 : 1.0)));
  }
  const auto s = sensitivity(r);
  REQUIRE(s.size() == 1);
  REQUIRE(s[0].ci_half_width.has_value());
  // sample sd: sqrt(4 * 0.25 / 3) and sqrt(4 / 3)
  const double se_b = std::sqrt(1.0 / 3.0) / 2.0;
  const double se_p = std::sqrt(4.0 / 3.0) / 2.0;
  const double ratio = 5.0 / 4.0;
  const double expect = 3.18245 * std::sqrt(se_p * se_p + ratio * ratio * se_b * se_b) / 4.0;
  CHECK(*s[0].ci_half_width == doctest::Approx(expect).epsilon(1e-4));
}

TEST_CASE("plan validation") {
  auto p = small_plan();
  p.replications = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = small_plan();
  p.loads = {1.2};
  CHECK_THROWS(p.validate());
  p = small_plan();
  p.schedulers.clear();
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK(parse_mode(to_string(PerturbationMode::SkewSlowTiers)) == PerturbationMode::SkewSlowTiers);
  CHECK(parse_direction("higher") == Direction::Higher);
  CHECK_THROWS_AS(parse_direction("sideways"), ConfigError);
}
