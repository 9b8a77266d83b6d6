// Training-engine checks. The engine computes loss and gradients through a
// reduced evaluation (two small exponentials); every quantity here is compared
// against an independent route: the staged forward pass for the loss, central
// finite differences for the gradients, and per-sample differencing for the
// robustness score.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <qsnn/qsnn.hpp>

using namespace qsnn;

namespace {

std::mt19937_64 rng_for(const char* tag) {
  std::seed_seq seq(tag, tag + std::char_traits<char>::length(tag));
  return std::mt19937_64(seq);
}

QsnnParameters random_point(const QsnnTopology& topo, std::mt19937_64& g,
                            double t_in = 10.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  QsnnParameters p;
  p.t_in = t_in;
  p.h.resize(static_cast<Index>(topo.hamiltonian_pairs.size()));
  for (Index k = 0; k < p.h.size(); ++k) p.h[k] = u(g);
  p.gamma_out.resize(static_cast<Index>(topo.output_channels.size()));
  for (Index k = 0; k < p.gamma_out.size(); ++k) p.gamma_out[k] = u(g);
  return p;
}

// Loss recomputed through the full staged forward pass (density-matrix
// propagators); shares no code path with the training engine's reduction.
double forward_loss(const QsnnTopology& topo, const QsnnParameters& params,
                    const std::vector<TrainingPair>& pairs) {
  double sum = 0.0;
  for (const auto& pr : pairs) {
    const auto r = forward(topo, params, pr.sequence);
    sum += pr.label == Label::Yes ? r.p_yes : r.p_no;
  }
  return 1.0 - sum / static_cast<double>(pairs.size());
}

double rel_gap(double got, double want) {
  return std::abs(got - want) / std::max(1e-8, std::abs(want));
}

std::vector<TrainingPair> two_word_pairs() {
  return {{{1, 2}, Label::Yes}, {{2, 1}, Label::No}};
}

std::vector<TrainingPair> eight_word_pairs() {
  return {{{1, 7}, Label::Yes}, {{4, 6}, Label::No}, {{2, 8}, Label::Yes}};
}

}  // namespace

TEST_CASE("engine loss equals the staged forward-pass loss") {
  auto g = rng_for("loss-dual-route");
  const auto small = QsnnTopology::fully_connected(2);
  const auto small_pairs = two_word_pairs();
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_point(small, g);
    REQUIRE(loss(small, p, small_pairs) ==
            Catch::Approx(forward_loss(small, p, small_pairs)).margin(1e-10));
  }
  const auto big = QsnnTopology::fully_connected(8);
  const auto big_pairs = eight_word_pairs();
  const auto p = random_point(big, g, 3.0);
  REQUIRE(loss(big, p, big_pairs) ==
          Catch::Approx(forward_loss(big, p, big_pairs)).margin(1e-10));
}

TEST_CASE("analytic gradient matches central differences, 2-word topology") {
  auto g = rng_for("grad-fd-small");
  const auto topo = QsnnTopology::fully_connected(2);
  const auto pairs = two_word_pairs();
  for (int trial = 0; trial < 6; ++trial) {
    const auto p = random_point(topo, g);
    const auto an = gradient(topo, p, pairs);
    const auto fd = finite_diff_gradient(topo, p, pairs, 1e-5);
    for (Index k = 0; k < an.h.size(); ++k)
      REQUIRE(rel_gap(an.h[k], fd.h[k]) < 1e-5);
    for (Index k = 0; k < an.gamma_out.size(); ++k)
      REQUIRE(rel_gap(an.gamma_out[k], fd.gamma_out[k]) < 1e-5);
  }
}

TEST_CASE("analytic gradient matches central differences, 8-word topology") {
  auto g = rng_for("grad-fd-large");
  const auto topo = QsnnTopology::fully_connected(8);
  const auto pairs = eight_word_pairs();
  for (int trial = 0; trial < 2; ++trial) {
    const auto p = random_point(topo, g, 3.0);
    const auto an = gradient(topo, p, pairs);
    const auto fd = finite_diff_gradient(topo, p, pairs, 1e-5);
    for (Index k = 0; k < an.h.size(); ++k)
      REQUIRE(rel_gap(an.h[k], fd.h[k]) < 1e-5);
    for (Index k = 0; k < an.gamma_out.size(); ++k)
      REQUIRE(rel_gap(an.gamma_out[k], fd.gamma_out[k]) < 1e-5);
  }
}

TEST_CASE("gradient at zero couplings is still correct") {
  auto g = rng_for("grad-zero-h");
  const auto topo = QsnnTopology::fully_connected(2);
  const auto pairs = two_word_pairs();
  auto p = random_point(topo, g);
  p.h.setZero();
  const auto an = gradient(topo, p, pairs);
  const auto fd = finite_diff_gradient(topo, p, pairs, 1e-5);
  for (Index k = 0; k < an.h.size(); ++k)
    REQUIRE(rel_gap(an.h[k], fd.h[k]) < 1e-5);
  for (Index k = 0; k < an.gamma_out.size(); ++k)
    REQUIRE(rel_gap(an.gamma_out[k], fd.gamma_out[k]) < 1e-5);
}

TEST_CASE("analytic gradient matches differencing of the staged forward pass") {
  // Third route: difference the forward() loss itself, so neither side of the
  // comparison reuses the engine's reduced evaluation.
  auto g = rng_for("grad-forward-route");
  const auto topo = QsnnTopology::fully_connected(2);
  const auto pairs = two_word_pairs();
  const auto p = random_point(topo, g);
  const auto an = gradient(topo, p, pairs);
  const double eps = 1e-5;
  auto fd_component = [&](auto&& set, double base) {
    QsnnParameters work = p;
    set(work, base + eps);
    const double up = forward_loss(topo, work, pairs);
    set(work, base - eps);
    const double down = forward_loss(topo, work, pairs);
    return (up - down) / (2.0 * eps);
  };
  const double fd_h = fd_component(
      [](QsnnParameters& q, double v) { q.h[0] = v; }, p.h[0]);
  REQUIRE(rel_gap(an.h[0], fd_h) < 1e-5);
  for (Index k : {Index(0), Index(3)}) {
    const double fd_g = fd_component(
        [k](QsnnParameters& q, double v) { q.gamma_out[k] = v; },
        p.gamma_out[k]);
    REQUIRE(rel_gap(an.gamma_out[k], fd_g) < 1e-5);
  }
}

TEST_CASE("flipping one decay amplitude's sign leaves the loss unchanged") {
  auto g = rng_for("gamma-sign-flip");
  const auto topo = QsnnTopology::fully_connected(2);
  const auto pairs = two_word_pairs();
  const auto p = random_point(topo, g);
  for (Index k = 0; k < p.gamma_out.size(); ++k) {
    QsnnParameters flipped = p;
    flipped.gamma_out[k] = -flipped.gamma_out[k];
    // The model only sees squared amplitudes, so the loss is bit-identical.
    REQUIRE(loss(topo, flipped, pairs) == loss(topo, p, pairs));
    const auto g0 = gradient(topo, p, pairs);
    const auto g1 = gradient(topo, flipped, pairs);
    for (Index m = 0; m < g0.gamma_out.size(); ++m) {
      if (m == k)
        REQUIRE(g1.gamma_out[m] == -g0.gamma_out[m]);
      else
        REQUIRE(g1.gamma_out[m] == g0.gamma_out[m]);
    }
    for (Index m = 0; m < g0.h.size(); ++m) REQUIRE(g1.h[m] == g0.h[m]);
  }
}

TEST_CASE("robustness equals one minus the mean squared sensitivity") {
  auto g = rng_for("robustness-fd");
  const auto topo = QsnnTopology::fully_connected(2);
  const auto pairs = two_word_pairs();
  const auto p = random_point(topo, g);
  const double got = robustness(topo, p, pairs);

  // Reconstruct it by differencing each sample's correct-label population.
  const double eps = 1e-5;
  double sq_sum = 0.0;
  int count = 0;
  for (const auto& pr : pairs) {
    const std::vector<TrainingPair> one{pr};
    for (Index k = 0; k < p.gamma_out.size(); ++k) {
      QsnnParameters work = p;
      work.gamma_out[k] = p.gamma_out[k] + eps;
      const double up = 1.0 - loss(topo, work, one);
      work.gamma_out[k] = p.gamma_out[k] - eps;
      const double down = 1.0 - loss(topo, work, one);
      const double deriv = (up - down) / (2.0 * eps);
      sq_sum += deriv * deriv;
      ++count;
    }
  }
  const double want = 1.0 - sq_sum / static_cast<double>(pairs.size()) /
                                static_cast<double>(p.gamma_out.size());
  REQUIRE(got == Catch::Approx(want).margin(1e-6));
  REQUIRE(got <= 1.0 + 1e-12);
}

TEST_CASE("robustness is exactly one when nothing decays") {
  const auto topo = QsnnTopology::fully_connected(2);
  QsnnParameters p;
  p.h = RVector::Constant(1, 0.4);
  p.gamma_out = RVector::Zero(4);
  // Every sensitivity carries a factor gamma_k = 0.
  REQUIRE(robustness(topo, p, two_word_pairs()) == 1.0);
}

TEST_CASE("gradient-descent step updates follow the mode") {
  const auto topo = QsnnTopology::fully_connected(2);
  QsnnParameters p;
  p.h = RVector::Constant(1, 0.1);
  p.gamma_out = RVector::Constant(4, 0.5);
  Gradients g{RVector::Constant(1, 2.0), RVector::Constant(4, -1.0)};

  const auto coh = sgd_step(p, g, 0.25, Mode::Coherent);
  REQUIRE(coh.h[0] == Catch::Approx(0.1 - 0.25 * 2.0));
  REQUIRE(coh.gamma_out[2] == Catch::Approx(0.5 + 0.25));

  const auto inc = sgd_step(p, g, 0.25, Mode::Incoherent);
  REQUIRE(inc.h[0] == 0.1);  // couplings frozen
  REQUIRE(inc.gamma_out[0] == Catch::Approx(0.75));

  REQUIRE_THROWS_AS(sgd_step(p, g, 0.0, Mode::Coherent), ValidationError);
  Gradients wrong{RVector::Zero(2), RVector::Zero(4)};
  REQUIRE_THROWS_AS(sgd_step(p, wrong, 0.1, Mode::Coherent), ValidationError);
}

TEST_CASE("training produces one record per iteration plus the start") {
  const auto topo = QsnnTopology::fully_connected(2);
  TrainConfig cfg;
  cfg.iterations = 7;
  cfg.seed = 42;
  const auto hist = train(topo, two_word_pairs(), cfg);
  REQUIRE(hist.records.size() == 8);
  for (int i = 0; i < 8; ++i) REQUIRE(hist.records[static_cast<std::size_t>(i)].iteration == i);

  TrainConfig none = cfg;
  none.iterations = 0;
  const auto h0 = train(topo, two_word_pairs(), none);
  REQUIRE(h0.records.size() == 1);
  // With zero iterations the final parameters are the initialization; its
  // recorded loss must match a fresh evaluation at those parameters.
  REQUIRE(h0.records[0].loss ==
          Catch::Approx(loss(topo, h0.final_qsnn, two_word_pairs())).margin(1e-12));
}

TEST_CASE("training is deterministic in seed and sample index") {
  const auto topo = QsnnTopology::fully_connected(2);
  TrainConfig cfg;
  cfg.iterations = 5;
  cfg.seed = 123;
  cfg.sample_index = 2;
  const auto a = train(topo, two_word_pairs(), cfg);
  const auto b = train(topo, two_word_pairs(), cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    REQUIRE(a.records[i].loss == b.records[i].loss);
    REQUIRE(a.records[i].robustness == b.records[i].robustness);
  }
  REQUIRE((a.final_qsnn.gamma_out - b.final_qsnn.gamma_out).cwiseAbs().maxCoeff() == 0.0);

  TrainConfig other = cfg;
  other.sample_index = 3;
  const auto c = train(topo, two_word_pairs(), other);
  REQUIRE(a.records[0].loss != c.records[0].loss);  // different draw
}

TEST_CASE("coherent training reduces the loss on the ordered-pair corpus") {
  const auto topo = QsnnTopology::fully_connected(2);
  TrainConfig cfg;
  cfg.iterations = 30;
  cfg.seed = 7;
  const auto hist = train(topo, two_word_pairs(), cfg);
  REQUIRE(hist.records.back().loss < hist.records.front().loss);
  REQUIRE(hist.records.back().loss < 0.4);
}

TEST_CASE("incoherent training keeps all couplings at zero") {
  const auto topo = QsnnTopology::fully_connected(2);
  TrainConfig cfg;
  cfg.mode = Mode::Incoherent;
  cfg.iterations = 4;
  cfg.seed = 9;
  const auto hist = train(topo, two_word_pairs(), cfg);
  REQUIRE(hist.final_qsnn.h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("finite-difference training follows the analytic path closely") {
  const auto topo = QsnnTopology::fully_connected(2);
  TrainConfig cfg;
  cfg.iterations = 3;
  cfg.seed = 11;
  const auto analytic = train(topo, two_word_pairs(), cfg);
  TrainConfig fd_cfg = cfg;
  fd_cfg.gradient_method = GradientMethod::FiniteDifference;
  const auto fd = train(topo, two_word_pairs(), fd_cfg);
  REQUIRE(fd.records[0].loss == analytic.records[0].loss);  // same init
  for (std::size_t i = 1; i < fd.records.size(); ++i)
    REQUIRE(fd.records[i].loss ==
            Catch::Approx(analytic.records[i].loss).margin(1e-7));
}

TEST_CASE("the correction schedule switches datasets at the right iteration") {
  const auto topo = QsnnTopology::fully_connected(2);
  const auto clean = two_word_pairs();
  std::vector<TrainingPair> corrupted = clean;
  corrupted[0].label = Label::No;  // mislabel one pair

  TrainConfig with_fix;
  with_fix.iterations = 6;
  with_fix.seed = 5;
  with_fix.correction = CorrectionSchedule{corrupted, 3};
  const auto fixed = train(topo, clean, with_fix);

  TrainConfig never_fixed;
  never_fixed.iterations = 6;
  never_fixed.seed = 5;
  const auto bad = train(topo, corrupted, never_fixed);

  // Identical while the corrupted set is active, diverging when it switches.
  for (int i = 0; i < 3; ++i)
    REQUIRE(fixed.records[static_cast<std::size_t>(i)].loss ==
            bad.records[static_cast<std::size_t>(i)].loss);
  REQUIRE(fixed.records[3].loss != bad.records[3].loss);

  TrainConfig immediate = with_fix;
  immediate.correction = CorrectionSchedule{corrupted, 0};
  TrainConfig plain;
  plain.iterations = 6;
  plain.seed = 5;
  const auto a = train(topo, clean, immediate);
  const auto b = train(topo, clean, plain);
  for (std::size_t i = 0; i < a.records.size(); ++i)
    REQUIRE(a.records[i].loss == b.records[i].loss);
}

TEST_CASE("tracked sequences record the network's Yes-probability") {
  const auto topo = QsnnTopology::fully_connected(2);
  TrainConfig cfg;
  cfg.iterations = 0;
  cfg.seed = 31;
  cfg.tracked_sequences = {{1, 2}, {2, 1}};
  const auto hist = train(topo, two_word_pairs(), cfg);
  REQUIRE(hist.records[0].tracked_p_yes.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto r = forward(topo, hist.final_qsnn, cfg.tracked_sequences[i]);
    REQUIRE(hist.records[0].tracked_p_yes[i] ==
            Catch::Approx(r.p_yes).margin(1e-10));
  }
}

TEST_CASE("a runaway learning rate raises a numeric error") {
  const auto topo = QsnnTopology::fully_connected(2);
  TrainConfig cfg;
  cfg.iterations = 10;
  cfg.learning_rate = 1e200;
  cfg.seed = 1;
  REQUIRE_THROWS_AS(train(topo, two_word_pairs(), cfg), NumericError);
}

TEST_CASE("gamma initialization specifications parse and draw correctly") {
  auto uni = GammaInit::parse("uniform:-0.5:0.5");
  REQUIRE(uni.kind == GammaInit::Kind::Uniform);
  SampleRng rng(99);
  const RVector u = uni.draw(8, rng, 0);
  for (Index i = 0; i < 8; ++i) {
    REQUIRE(u[i] >= -0.5);
    REQUIRE(u[i] < 0.5);
  }
  REQUIRE(u.maxCoeff() != u.minCoeff());  // actually random

  auto cons = GammaInit::parse("const:0.3");
  SampleRng rng2(99);
  const RVector c = cons.draw(3, rng2, 7);
  REQUIRE(c.isConstant(0.3));

  auto grid = GammaInit::parse("grid:0.1,0.3,0.5,0.7");
  SampleRng rng3(99);
  REQUIRE(grid.draw(2, rng3, 0).isConstant(0.1));
  REQUIRE(grid.draw(2, rng3, 1).isConstant(0.3));
  REQUIRE(grid.draw(2, rng3, 5).isConstant(0.3));  // round robin wraps

  REQUIRE_THROWS_AS(GammaInit::parse("uniform:1:0"), ValidationError);
  REQUIRE_THROWS_AS(GammaInit::parse("uniform:0"), ValidationError);
  REQUIRE_THROWS_AS(GammaInit::parse("const:abc"), ValidationError);
  REQUIRE_THROWS_AS(GammaInit::parse("grid:"), ValidationError);
  REQUIRE_THROWS_AS(GammaInit::parse("gaussian:0:1"), ValidationError);
}

TEST_CASE("training configuration validation") {
  TrainConfig cfg;
  REQUIRE_NOTHROW(cfg.validate());
  TrainConfig neg = cfg;
  neg.iterations = -1;
  REQUIRE_THROWS_AS(neg.validate(), ValidationError);
  TrainConfig zero_lr = cfg;
  zero_lr.learning_rate = 0.0;
  REQUIRE_THROWS_AS(zero_lr.validate(), ValidationError);
  TrainConfig late = cfg;
  late.iterations = 10;
  late.correction = CorrectionSchedule{{{{1, 2}, Label::Yes}}, 11};
  REQUIRE_THROWS_AS(late.validate(), ValidationError);
  TrainConfig empty_fix = cfg;
  empty_fix.correction = CorrectionSchedule{{}, 0};
  REQUIRE_THROWS_AS(empty_fix.validate(), ValidationError);
}

TEST_CASE("the classical baseline's history lines up with the network's") {
  const auto topo = QsnnTopology::fully_connected(2);
  TrainConfig cfg;
  cfg.iterations = 5;
  cfg.seed = 17;
  cfg.tracked_sequences = {{1, 2}};
  const auto hist = classical_train(topo, two_word_pairs(), cfg);
  REQUIRE(hist.records.size() == 6);
  for (const auto& rec : hist.records) {
    REQUIRE(std::isnan(rec.robustness));  // undefined for the baseline
    REQUIRE(rec.tracked_p_yes.size() == 1);
    REQUIRE(rec.tracked_p_yes[0] >= 0.0);
    REQUIRE(rec.tracked_p_yes[0] <= 1.0);
  }
  REQUIRE(hist.records.back().loss < hist.records.front().loss);

  const auto again = classical_train(topo, two_word_pairs(), cfg);
  for (std::size_t i = 0; i < hist.records.size(); ++i)
    REQUIRE(hist.records[i].loss == again.records[i].loss);
}
