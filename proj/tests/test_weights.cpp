#include <doctest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "shiftlab/weight.hpp"

using namespace shiftlab;

TEST_CASE("envelope of the flat weight is 1 for every power") {
  const Weight w = Weight::constant(Support::ZPlus, 0, 128);
  for (long m : {0L, 1L, 5L, 16L})
    CHECK(envelope(w, EnvelopeKind::Bar, m).log_value == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(envelope(w, EnvelopeKind::Tilde, 5).log_value == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("geometric weight 2^n: tilde(3) = 8, bar(3) = 1/8") {
  const Weight w = Weight::from_log_fn(Support::ZPlus, 0, 64,
                                       [](long n) { return n * std::log(2.0); });
  CHECK(std::exp(envelope(w, EnvelopeKind::Tilde, 3).log_value) ==
        doctest::Approx(8.0).epsilon(1e-12));
  CHECK(std::exp(envelope(w, EnvelopeKind::Bar, 3).log_value) ==
        doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("envelope matches a brute-force sup for e^{n^0.7}") {
  const auto f = [](long n) { return std::pow(static_cast<double>(n), 0.7); };
  const Weight w = Weight::from_log_fn(Support::ZPlus, 0, 80, f);
  for (long m : {1L, 4L, 9L}) {
    double direct = -1e300;
    long arg = 0;
    for (long n = 0; n + m <= 80; ++n) {
      const double v = f(n) - f(n + m);
      if (v > direct) {
        direct = v;
        arg = n;
      }
    }
    const auto env = envelope(w, EnvelopeKind::Bar, m);
    CHECK(env.log_value == doctest::Approx(direct).epsilon(1e-13));
    CHECK(env.arg_n == arg);
  }
}

TEST_CASE("legendre sup matches brute force for an e^{sqrt n} tail") {
  const Weight w = Weight::from_log_fn(Support::ZMinus, -200, -1, [](long n) {
    return std::sqrt(static_cast<double>(-n));
  });
  for (double r : {0.3, 0.7, 0.9}) {
    double direct = -1e300;
    for (long n = 0; n <= 198; ++n)
      direct = std::max(direct, n * std::log(r) + w.log_at(-n - 1));
    CHECK(legendre(w, r).log_value == doctest::Approx(direct).epsilon(1e-13));
  }
}

TEST_CASE("dual is an involution and check_variant boosts by (n+1)^2") {
  const Weight w = Weight::from_log_fn(Support::Z, -12, 12, [](long n) {
    return std::cos(0.3 * static_cast<double>(n));
  });
  const Weight d = w.dual();
  CHECK(d.log_at(-5) == doctest::Approx(-w.log_at(4)).epsilon(1e-15));
  const Weight dd = d.dual();
  for (long n = -12; n <= 12; ++n)
    CHECK(dd.log_at(n) == doctest::Approx(w.log_at(n)).epsilon(1e-15));

  const Weight p = Weight::from_log_fn(Support::ZPlus, 0, 20,
                                       [](long n) { return 0.2 * n; });
  const Weight cv = p.check_variant();
  CHECK(cv.support() == Support::ZMinus);
  for (long n = 1; n <= 20; ++n)
    CHECK(cv.log_at(-n) ==
          doctest::Approx(2.0 * std::log(n + 1.0) + 0.2 * n).epsilon(1e-14));
}

TEST_CASE("power and product agree in the log domain") {
  const Weight w = Weight::from_log_fn(Support::ZPlus, 0, 30,
                                       [](long n) { return std::sqrt(1.0 + n); });
  const Weight a = w.power(2.0);
  const Weight b = w.product(w);
  for (long n = 0; n <= 30; ++n)
    CHECK(a.log_at(n) == doctest::Approx(b.log_at(n)).epsilon(1e-14));
}

TEST_CASE("JSON and CSV round trips") {
  const Weight w = Weight::from_log_fn(Support::ZMinus, -6, -1,
                                       [](long n) { return 0.5 * n; });
  const Weight back = Weight::from_json(w.to_json());
  CHECK(back.n_lo() == w.n_lo());
  CHECK(back.support() == Support::ZMinus);
  for (long n = -6; n <= -1; ++n)
    CHECK(back.log_at(n) == doctest::Approx(w.log_at(n)).epsilon(1e-15));

  // csv columns are n, sigma in linear scale
  std::istringstream csv("0,1.0\n1,1.5\n2,2.718281828459045\n");
  const Weight wc = Weight::from_csv(csv, Support::ZPlus);
  CHECK(wc.size() == 3);
  CHECK(wc.log_at(2) == doctest::Approx(1.0));
  CHECK(wc.log_at(0) == doctest::Approx(0.0));

  std::istringstream bad("0,1.0\n1,0.0\n");
  CHECK_THROWS(Weight::from_csv(bad, Support::ZPlus));
}

TEST_CASE("constructor rejects broken windows") {
  CHECK_THROWS(Weight(Support::ZPlus, 1, {0.0, 0.0}));   // Z+ must start at 0
  CHECK_THROWS(Weight(Support::ZMinus, -3, {0.0, 0.0, 0.0, 0.0}));  // crosses 0
  CHECK_THROWS(Weight(Support::Z, 0, {std::nan("")}));
}

TEST_CASE("classification of geometric weights rho^n") {
  const auto make = [](double rho) {
    return Weight::from_log_fn(Support::ZPlus, 0, 240, [rho](long n) {
      return n * std::log(rho);
    });
  };
  CHECK(classify(make(1.0)).verdicts.at("class_membership") == Verdict::Pass);
  CHECK(classify(make(0.5)).verdicts.at("class_membership") == Verdict::Fail);
  CHECK(classify(make(2.0)).verdicts.at("class_membership") == Verdict::Fail);
}

TEST_CASE("classify reports curvature and ratio bounds") {
  const Weight w = Weight::from_log_fn(Support::ZPlus, 0, 200, [](long n) {
    return std::sqrt(static_cast<double>(n));
  });
  const auto rep = classify(w);
  CHECK(rep.verdicts.at("eventually_log_concave") == Verdict::Pass);
  CHECK(rep.ratio_sup >= rep.ratio_inf);
  CHECK(rep.ratio_inf >= 1.0);  // increasing weight
  const auto j = rep.to_json();
  CHECK(j.contains("verdicts"));
}

TEST_CASE("series-sum heuristic on stock examples") {
  std::vector<double> gauss(300), flat(300, 0.0), poly2(300);
  for (size_t n = 0; n < 300; ++n) {
    gauss[n] = -static_cast<double>(n * n);
    poly2[n] = -2.0 * std::log(static_cast<double>(n + 2));
  }
  CHECK(classify_series_sum(gauss, 0).verdict == Verdict::Pass);
  CHECK(classify_series_sum(flat, 0).verdict == Verdict::Fail);
  CHECK(classify_series_sum(poly2, 2).verdict == Verdict::Pass);
}
