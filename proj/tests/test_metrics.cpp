#include <doctest.h>

#include "hybridfv/metrics.hpp"

#include <cmath>
#include <random>

using namespace hybridfv;

TEST_CASE("error metric examples") {
    CHECK(rel_l2({3, 4}, {3, 4}) == 0.0);
    CHECK(rel_l2({3, 4}, {0, 0}) == doctest::Approx(1.0));
    CHECK(rel_l2({1, 2}, {1, 4}) == doctest::Approx(2.0 / std::sqrt(5.0)));
    CHECK(std::isnan(rel_l2({0, 0}, {1, 1})));  // zero-norm sentinel

    CHECK(mse({1, 2}, {1, 2}) == 0.0);
    CHECK(mse({1, 2}, {1, 4}) == doctest::Approx(2.0));

    CHECK(mae({1, 2}, {1, 2}) == 0.0);
    CHECK(mae({1, 2}, {2, 0}) == doctest::Approx(1.5));

    CHECK(maxae({1, 2}, {1, 2}) == 0.0);
    CHECK(maxae({1, 2}, {2, 0}) == doctest::Approx(2.0));

    CHECK_THROWS(mse({1, 2}, {1}));
    CHECK_THROWS(mae({1, 2}, {1}));
    CHECK_THROWS(maxae({1, 2}, {1}));
}

TEST_CASE("metric identities on random pairs") {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> dist(-3, 3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + trial;
        Field a(n), b(n);
        for (double& v : a) v = dist(rng);
        for (double& v : b) v = dist(rng);

        const double m_mse = mse(a, b);
        const double m_mae = mae(a, b);
        const double m_max = maxae(a, b);
        const double m_l2 = rel_l2(a, b);

        CHECK(m_max >= m_mae);
        CHECK(m_mae <= std::sqrt(m_mse) + 1e-15);  // Jensen
        CHECK(m_mse <= m_max * m_mae + 1e-15);

        // rel_l2^2 = mse * N / ||a||^2, exactly
        double denom = 0;
        for (double v : a) denom += v * v;
        CHECK(m_l2 * m_l2 ==
              doctest::Approx(m_mse * static_cast<double>(n) / denom)
                  .epsilon(1e-12));
    }
}

TEST_CASE("metrics are permutation invariant") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-1, 1);
    Field a(32), b(32);
    for (double& v : a) v = dist(rng);
    for (double& v : b) v = dist(rng);
    Field ap = a, bp = b;
    // one fixed permutation applied to both
    std::vector<std::size_t> perm(32);
    for (std::size_t i = 0; i < 32; ++i) perm[i] = (i * 7 + 3) % 32;
    for (std::size_t i = 0; i < 32; ++i) {
        ap[i] = a[perm[i]];
        bp[i] = b[perm[i]];
    }
    CHECK(mse(a, b) == doctest::Approx(mse(ap, bp)).epsilon(1e-14));
    CHECK(mae(a, b) == doctest::Approx(mae(ap, bp)).epsilon(1e-14));
    CHECK(maxae(a, b) == maxae(ap, bp));
    CHECK(rel_l2(a, b) == doctest::Approx(rel_l2(ap, bp)).epsilon(1e-14));
}

TEST_CASE("trajectory comparison aligns on shared steps") {
    const StructuredGrid g = make_grid({4, 4}, {1, 1});
    auto state_with = [&](double tval, double uval, double time) {
        FieldState s = make_state(g);
        s.T.assign(g.cell_count(), tval);
        s.u[0].assign(g.cell_count(), uval);
        s.time = time;
        return s;
    };
    std::vector<std::pair<long, FieldState>> truth, pred;
    truth.emplace_back(0, state_with(300, 0.0, 0.0));
    truth.emplace_back(10, state_with(301, 1.0, 0.1));
    truth.emplace_back(20, state_with(302, 2.0, 0.2));
    pred.emplace_back(10, state_with(301.5, 1.0, 0.1));
    pred.emplace_back(20, state_with(302, 2.5, 0.2));
    pred.emplace_back(30, state_with(303, 3.0, 0.3));  // unmatched

    const ErrorSeries series = compare_trajectories(g, truth, pred);
    REQUIRE(series.steps == std::vector<long>{10, 20});
    CHECK(series.var_names[0] == "T");
    CHECK(series.rows[0][0].mae == doctest::Approx(0.5));
    CHECK(series.rows[1][0].mae == doctest::Approx(0.0));
    CHECK(series.rows[1][2].maxae == doctest::Approx(0.5));  // ux at step 20

    const auto avg = series.time_average();
    CHECK(avg[0].mae == doctest::Approx(0.25));
}
