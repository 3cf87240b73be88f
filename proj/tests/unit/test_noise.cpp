#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "syncrds/error.hpp"
#include "syncrds/log.hpp"
#include "syncrds/noise.hpp"
#include "syncrds/statistics.hpp"

using namespace syncrds;

namespace {

// Standard error of the mean of a sample of products, estimated from the sample.
double se_of_mean(const std::vector<double>& xs) {
  return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("gen_brownian single increment is reproducible") {
  const auto p = gen_brownian(7, 0.0, 1.0, 1.0, 1);
  const auto q = gen_brownian(7, 0.0, 1.0, 1.0, 1);
  REQUIRE(p.length() == 2);
  CHECK(p.at(0)[0] == 0.0);
  CHECK(p.at(1)[0] == q.at(1)[0]);
  CHECK(std::abs(p.at(1)[0]) < 6.0);
  CHECK(gen_brownian(8, 0.0, 1.0, 1.0, 1).at(1)[0] != p.at(1)[0]);
}

TEST_CASE("gen_brownian increment variance matches dt") {
  const double dt = 0.25;
  const auto p = gen_brownian(11, 0.0, 10000 * dt, dt, 1);
  std::vector<double> inc;
  for (std::size_t k = 0; k + 1 < p.length(); ++k) inc.push_back(p.at(k + 1)[0] - p.at(k)[0]);
  REQUIRE(inc.size() == 10000);
  const double s2 = variance(inc);
  const double se = s2 * std::sqrt(2.0 / (inc.size() - 1.0));
  CHECK(std::abs(s2 - dt) <= 3.0 * se);
  CHECK(std::abs(mean(inc)) <= 3.0 * std::sqrt(dt / inc.size()));
}

TEST_CASE("gen_brownian components are uncorrelated") {
  const auto p = gen_brownian(3, 0.0, 100.0, 0.01, 3);
  std::vector<std::vector<double>> inc(3);
  for (std::size_t k = 0; k + 1 < p.length(); ++k) {
    for (int i = 0; i < 3; ++i) inc[i].push_back(p.at(k + 1)[i] - p.at(k)[i]);
  }
  const double se = 1.0 / std::sqrt(static_cast<double>(inc[0].size()));
  CHECK(std::abs(correlation(inc[0], inc[1])) <= 3.0 * se);
  CHECK(std::abs(correlation(inc[0], inc[2])) <= 3.0 * se);
  CHECK(std::abs(correlation(inc[1], inc[2])) <= 3.0 * se);
}

TEST_CASE("gen_brownian rejects bad requests") {
  CHECK_THROWS_AS(gen_brownian(1, 0.0, 1.0, 0.0, 1), InvalidArgument);
  CHECK_THROWS_AS(gen_brownian(1, 0.0, 1.0, -0.1, 1), InvalidArgument);
  CHECK_THROWS_AS(gen_brownian(1, 0.0, 1.0, 0.3, 1), InvalidArgument);
  CHECK_THROWS_AS(gen_brownian(1, 0.0, 1.0, 1e-3, 1, 100), InvalidArgument);
  CHECK_THROWS_AS(gen_brownian(1, 0.0, 1.0, 0.1, 0), InvalidArgument);
}

TEST_CASE("QSpec bookkeeping") {
  QSpec q{{1.0, 0.5, 0.0}, 1.0};
  CHECK(q.trace() == doctest::Approx(1.25));
  CHECK_FALSE(q.non_degenerate());
  CHECK(QSpec::harmonic(4).non_degenerate());
  CHECK_THROWS_AS((QSpec{{1.0, -1.0}, 1.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS((QSpec{{1.0, NAN}, 1.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS((QSpec{{1.0}, 0.0}).validate(), InvalidArgument);
}

TEST_CASE("gen_q_wiener with zero amplitudes is identically zero") {
  const auto p = gen_q_wiener(5, QSpec{{0.0, 0.0, 0.0}, 1.0}, 8, 0.0, 1.0, 0.1);
  for (double v : p.raw()) CHECK(v == 0.0);
}

TEST_CASE("gen_q_wiener single mode at the midpoint has variance 2 dt") {
  const QSpec q{{1.0}, 1.0};
  const double dt = 0.1;
  const auto p = gen_q_wiener(9, q, 1, 0.0, 10000 * dt, dt);
  std::vector<double> inc;
  for (std::size_t k = 0; k + 1 < p.length(); ++k) inc.push_back(p.at(k + 1)[0] - p.at(k)[0]);
  const double s2 = variance(inc);
  const double se = s2 * std::sqrt(2.0 / (inc.size() - 1.0));
  CHECK(std::abs(s2 - 2.0 * dt) <= 3.0 * se);
}

TEST_CASE("gen_q_wiener spatial covariance matches the mode expansion") {
  const QSpec q{{1.0, 0.5, 0.25, 0.125}, 2.0};
  const std::size_t n = 3;
  const double t = 1.0;
  const std::size_t samples = 10000;
  std::vector<std::vector<double>> w(samples);
  // Four modes on three nodes alias by design here.
  auto old = set_warning_sink([](const std::string&) {});
  for (std::size_t s = 0; s < samples; ++s) {
    const auto p = gen_q_wiener(1000 + s, q, n, 0.0, t, 0.5);
    const auto v = p.value(t);
    w[s] = v;
  }
  set_warning_sink(old);
  const double h = q.domain_length / (n + 1);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j; k < n; ++k) {
      double expected = 0.0;
      for (std::size_t i = 0; i < q.n_modes(); ++i) {
        const double a = (i + 1) * M_PI / q.domain_length;
        expected += q.q[i] * q.q[i] * (2.0 / q.domain_length) * std::sin(a * (j + 1) * h) *
                    std::sin(a * (k + 1) * h) * t;
      }
      std::vector<double> prod(samples);
      for (std::size_t s = 0; s < samples; ++s) prod[s] = w[s][j] * w[s][k];
      CAPTURE(j);
      CAPTURE(k);
      CHECK(std::abs(mean(prod) - expected) <= 3.0 * se_of_mean(prod));
    }
  }
}

TEST_CASE("gen_q_wiener warns about aliased modes") {
  std::string seen;
  auto old = set_warning_sink([&](const std::string& m) { seen = m; });
  gen_q_wiener(1, QSpec::harmonic(5), 3, 0.0, 1.0, 0.5);
  set_warning_sink(old);
  CHECK(seen.find("alias") != std::string::npos);
}

TEST_CASE("gen_fbm with H = 1/2 has uncorrelated increments") {
  const auto p = gen_fbm(21, 0.5, 0.0, 100.0, 0.01);
  std::vector<double> a, b;
  for (std::size_t k = 0; k + 2 < p.length(); ++k) {
    a.push_back(p.at(k + 1)[0] - p.at(k)[0]);
    b.push_back(p.at(k + 2)[0] - p.at(k + 1)[0]);
  }
  CHECK(std::abs(correlation(a, b)) <= 3.0 / std::sqrt(static_cast<double>(a.size())));
}

TEST_CASE("gen_fbm H = 0.75 covariance matches the closed form") {
  const double H = 0.75, s = 0.5, t = 1.0;
  const std::size_t n = 10000;
  std::vector<double> prod(n), ends(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = gen_fbm(500 + i, H, 0.0, 1.0, 0.01);
    prod[i] = p.value(s)[0] * p.value(t)[0];
    ends[i] = p.value(t)[0];
  }
  const double expected =
      0.5 * (std::pow(s, 2 * H) + std::pow(t, 2 * H) - std::pow(std::abs(t - s), 2 * H));
  CHECK(std::abs(mean(prod) - expected) <= 3.0 * se_of_mean(prod));
  // Var B_1 = 1 normalization.
  const double v = variance(ends);
  CHECK(std::abs(v - 1.0) <= 3.0 * v * std::sqrt(2.0 / (n - 1.0)));
}

TEST_CASE("gen_fbm two-sided path is pinned at the origin") {
  for (double H : {0.2, 0.5, 0.8}) {
    const auto p = gen_fbm(3, H, -2.0, 3.0, 0.05);
    CHECK(p.value(0.0)[0] == 0.0);
    CHECK(p.t_start() == -2.0);
  }
  CHECK_THROWS_AS(gen_fbm(1, 1.0, 0.0, 1.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(gen_fbm(1, 0.0, 0.0, 1.0, 0.1), InvalidArgument);
}

TEST_CASE("shift and increment identities hold exactly") {
  const auto p = gen_brownian(4, 0.0, 10.0, 0.01, 2);
  SUBCASE("identity shift") {
    const auto q = shift(p, 0.0);
    CHECK(q.raw() == p.raw());
    CHECK(q.t_start() == p.t_start());
  }
  SUBCASE("group property on the common window") {
    const auto q = shift(shift(p, 3.0), -3.0);
    for (std::size_t k = 0; k < p.length(); ++k) {
      CHECK(q.value(p.time_at(k)) == p.value(p.time_at(k)));
    }
    const auto a = shift(shift(p, 1.5), 2.25);
    const auto b = shift(p, 3.75);
    for (double t = -3.75; t <= 6.25; t += 0.25) CHECK(a.value(t) == b.value(t));
  }
  SUBCASE("shifted increments are original increments") {
    const double s = 2.0;
    const auto q = shift(p, s);
    CHECK(increment(q, 0.0, 0.01) == increment(p, s, s + 0.01));
    CHECK(increment(q, -1.0, 3.0) == increment(p, s - 1.0, s + 3.0));
  }
  SUBCASE("telescoping and zero increments") {
    CHECK(increment(p, 2.0, 2.0) == std::vector<double>{0.0, 0.0});
    const auto a = increment(p, 1.0, 4.0);
    const auto b = increment(p, 4.0, 7.5);
    const auto c = increment(p, 1.0, 7.5);
    for (int i = 0; i < 2; ++i) CHECK(a[i] + b[i] == c[i]);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(shift(p, 0.005), InvalidArgument);
    CHECK_THROWS_AS(shift(p, 11.0), InvalidArgument);
    CHECK_THROWS_AS(increment(p, 1.0, 0.5), InvalidArgument);
    CHECK_THROWS_AS(increment(p, 0.0, 10.5), InvalidArgument);
    CHECK_THROWS_AS(increment(p, 0.0, 0.0051), InvalidArgument);
  }
}

TEST_CASE("binary path dump has the documented layout") {
  const auto p = gen_q_wiener(2, QSpec::harmonic(3), 3, -1.0, 1.0, 0.5);
  std::ostringstream out;
  write_path_binary(p, out);
  const std::string bytes = out.str();
  REQUIRE(bytes.size() == 32 + 8 * p.raw().size());
  CHECK(bytes.substr(0, 8) == "SYNCRDS1");
  std::istringstream in(bytes);
  const auto q = read_path_binary(in, NoiseKind::q_wiener);
  CHECK(q.dim() == 3);
  CHECK(q.dt() == 0.5);
  CHECK(q.t_start() == -1.0);
  CHECK(q.raw() == p.raw());

  std::istringstream bad(std::string("NOTMAGIC") + bytes.substr(8));
  CHECK_THROWS_AS(read_path_binary(bad), InvalidArgument);
}
