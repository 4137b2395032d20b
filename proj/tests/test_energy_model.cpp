#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "mixmad/dataset.hpp"
#include "mixmad/mvrbm.hpp"
#include "mixmad/synthetic.hpp"
#include "oracles.hpp"

using namespace mixmad;

namespace {

ColumnSpec col(const char* name, ColumnKind kind, int card = 0) {
    return {name, kind, card, std::nan(""), std::nan("")};
}

Schema single(ColumnKind kind, int card = 0) {
    Schema s;
    s.columns.push_back(col("x", kind, card));
    return s;
}

}  // namespace

TEST_CASE("sub_energy per kind") {
    const double a_bin[] = {0.7};
    CHECK(sub_energy(col("b", ColumnKind::Binary), 1.0, a_bin) == doctest::Approx(-0.7).epsilon(1e-12));

    const double a_zero[] = {0.0};
    CHECK(sub_energy(col("g", ColumnKind::Gaussian), 2.0, a_zero) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(sub_energy(col("p", ColumnKind::Poisson), 3.0, a_zero) ==
          doctest::Approx(std::log(6.0)).epsilon(1e-9));

    const double a_nom[] = {0.1, 0.2, 0.3};
    CHECK(sub_energy(col("n", ColumnKind::Nominal, 3), 2.0, a_nom) == doctest::Approx(-0.3));
    CHECK_THROWS_AS(sub_energy(col("n", ColumnKind::Nominal, 3), 2.0, a_zero), std::invalid_argument);
}

TEST_CASE("hidden_preactivation") {
    SUBCASE("zero weights pass the biases through") {
        MvRbm model(binary_schema(3), 2);
        model.hidden_bias() << 1.0, -1.0;
        const std::vector<double> x{1, 0, 1};
        const Eigen::VectorXd z = model.hidden_preactivation(x);
        CHECK(z[0] == 1.0);
        CHECK(z[1] == -1.0);
    }
    SUBCASE("single binary term") {
        MvRbm model(single(ColumnKind::Binary), 1);
        model.weights()(0, 0) = 2.0;
        const std::vector<double> x{1};
        CHECK(model.hidden_preactivation(x)[0] == -2.0);
    }
    SUBCASE("gaussian linear form") {
        Schema s;
        s.columns.push_back(col("g0", ColumnKind::Gaussian));
        s.columns.push_back(col("g1", ColumnKind::Gaussian));
        MvRbm model(s, 1);
        model.weights()(0, 0) = 1.0;
        model.weights()(1, 0) = 2.0;
        model.hidden_bias()[0] = 3.0;
        const std::vector<double> x{0.5, 1.0};
        CHECK(model.hidden_preactivation(x)[0] == doctest::Approx(0.5).epsilon(1e-15));
    }
}

TEST_CASE("free_energy closed forms") {
    SUBCASE("symmetric zero model") {
        MvRbm model(binary_schema(3), 4);
        for (const auto& x : oracle::enumerate_discrete_records(model.visible()))
            CHECK(model.free_energy(x) == doctest::Approx(-4.0 * std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("one gaussian unit") {
        MvRbm model(single(ColumnKind::Gaussian), 1);
        const std::vector<double> x{2.0};
        CHECK(model.free_energy(x) == doctest::Approx(2.0 - std::log(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("free_energy matches 2^K enumeration on random mixed models") {
    Rng rng(1234);
    std::uniform_int_distribution<int> hidden(1, 10);
    for (int trial = 0; trial < 60; ++trial) {
        const Schema schema = oracle::random_mixed_schema(rng, 6);
        const MvRbm model = oracle::random_model(rng, schema, hidden(rng), 0.8);
        for (int r = 0; r < 5; ++r) {
            const std::vector<double> x = oracle::random_record(rng, schema);
            const double expected = oracle::brute_force_free_energy(model, x);
            CHECK(model.free_energy(x) == doctest::Approx(expected).epsilon(1e-11));
            CHECK(std::abs(model.free_energy(x) - expected) <= 1e-9);
        }
    }
}

TEST_CASE("sigmoid of the preactivation is the exact hidden conditional") {
    Rng rng(555);
    for (int trial = 0; trial < 40; ++trial) {
        const Schema schema = oracle::random_mixed_schema(rng, 4);
        const MvRbm model = oracle::random_model(rng, schema, 1 + static_cast<int>(rng() % 6), 0.7);
        const std::vector<double> x = oracle::random_record(rng, schema);
        const Eigen::VectorXd z = model.hidden_preactivation(x);
        for (int k = 0; k < model.num_hidden(); ++k)
            CHECK(std::abs(sigmoid(z[k]) - oracle::hidden_conditional(model, x, k)) <= 1e-12);
    }
}

TEST_CASE("softplus is stable and monotone in the preactivation") {
    CHECK(softplus(1000.0) == 1000.0);
    CHECK(softplus(-1000.0) == 0.0);
    CHECK(std::isfinite(softplus(745.0)));

    // increasing any z_k strictly decreases F
    Rng rng(77);
    const Schema schema = oracle::random_mixed_schema(rng, 5);
    MvRbm model = oracle::random_model(rng, schema, 6, 0.5);
    const std::vector<double> x = oracle::random_record(rng, schema);
    const double before = model.free_energy(x);
    model.hidden_bias()[2] += 0.25;  // raises z_2 for every x
    CHECK(model.free_energy(x) < before);
}

TEST_CASE("hidden bias shift changes F continuously (softplus is 1-Lipschitz)") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Schema schema = oracle::random_mixed_schema(rng, 5);
        MvRbm model = oracle::random_model(rng, schema, 8, 0.6);
        const std::vector<double> x = oracle::random_record(rng, schema);
        const double before = model.free_energy(x);
        const double shift = 1e-3;
        model.hidden_bias().array() += shift;
        CHECK(std::abs(model.free_energy(x) - before) <= model.num_hidden() * shift + 1e-12);
    }
}

TEST_CASE("sample_hidden") {
    SUBCASE("saturated unit") {
        MvRbm model(single(ColumnKind::Binary), 1);
        model.hidden_bias()[0] = 50.0;
        Rng rng(1);
        int ones = 0;
        const std::vector<double> x{0};
        for (int i = 0; i < 1000; ++i) ones += model.sample_hidden(x, rng)[0] == 1.0;
        CHECK(ones >= 999);
    }
    SUBCASE("fair coin at z = 0") {
        MvRbm model(single(ColumnKind::Binary), 1);
        Rng rng(2);
        double mean = 0.0;
        const std::vector<double> x{1};
        for (int i = 0; i < 10000; ++i) mean += model.sample_hidden(x, rng)[0];
        mean /= 10000.0;
        CHECK(mean == doctest::Approx(0.5).epsilon(0.04));
    }
    SUBCASE("empirical frequency matches the enumeration conditional") {
        Rng rng(909);
        const Schema schema = oracle::random_mixed_schema(rng, 3);
        const MvRbm model = oracle::random_model(rng, schema, 3, 0.8);
        const std::vector<double> x = oracle::random_record(rng, schema);
        const int draws = 100000;
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(model.num_hidden());
        for (int i = 0; i < draws; ++i) counts += model.sample_hidden(x, rng);
        for (int k = 0; k < model.num_hidden(); ++k) {
            const double p = oracle::hidden_conditional(model, x, k);
            const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / draws);
            CHECK(std::abs(counts[k] / draws - p) <= 3.0 * se + 1e-9);
        }
    }
    SUBCASE("reproducible under a fixed seed") {
        Rng rng_a(11), rng_b(11);
        const MvRbm model(binary_schema(4), 5);
        const std::vector<double> x{1, 0, 1, 1};
        for (int i = 0; i < 20; ++i)
            CHECK(model.sample_hidden(x, rng_a) == model.sample_hidden(x, rng_b));
    }
}

TEST_CASE("sample_visible") {
    SUBCASE("symmetric binary column") {
        MvRbm model(single(ColumnKind::Binary), 1);
        Rng rng(3);
        const Eigen::VectorXd h = Eigen::VectorXd::Zero(1);
        double mean = 0.0;
        for (int i = 0; i < 10000; ++i) mean += model.sample_visible(h, rng)[0];
        CHECK(mean / 10000.0 == doctest::Approx(0.5).epsilon(0.04));
    }
    SUBCASE("gaussian conditional mean") {
        MvRbm model(single(ColumnKind::Gaussian), 1);
        model.visible_bias()[0] = 1.5;
        Rng rng(4);
        const Eigen::VectorXd h = Eigen::VectorXd::Zero(1);
        double mean = 0.0;
        for (int i = 0; i < 10000; ++i) mean += model.sample_visible(h, rng)[0];
        CHECK(mean / 10000.0 == doctest::Approx(1.5).epsilon(0.04));
    }
    SUBCASE("poisson rate clamp is recorded") {
        MvRbm model(single(ColumnKind::Poisson), 1);
        model.visible_bias()[0] = 40.0;  // m = 40 > 30
        Rng rng(5);
        int clamps = 0;
        const Eigen::VectorXd h = Eigen::VectorXd::Zero(1);
        const std::vector<double> v = model.sample_visible(h, rng, &clamps);
        CHECK(clamps == 1);
        CHECK(v[0] >= 0.0);
        CHECK(std::isfinite(v[0]));
    }
    SUBCASE("discrete conditional matches enumeration of P(x|h)") {
        Rng rng(777);
        Schema schema;
        schema.columns.push_back(col("b0", ColumnKind::Binary));
        schema.columns.push_back(col("n0", ColumnKind::Nominal, 3));
        schema.columns.push_back(col("b1", ColumnKind::Binary));
        const MvRbm model = oracle::random_model(rng, schema, 2, 0.7);
        const std::vector<int> hidden{1, 0};
        Eigen::VectorXd h(2);
        h << 1.0, 0.0;

        const auto records = oracle::enumerate_discrete_records(schema);
        const auto probs = oracle::visible_conditional(model, records, hidden);

        const int draws = 100000;
        std::vector<int> counts(records.size(), 0);
        for (int i = 0; i < draws; ++i) {
            const std::vector<double> v = model.sample_visible(h, rng);
            for (std::size_t r = 0; r < records.size(); ++r)
                if (records[r] == v) { ++counts[r]; break; }
        }
        for (std::size_t r = 0; r < records.size(); ++r) {
            const double p = probs[r];
            const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / draws);
            CHECK(std::abs(double(counts[r]) / draws - p) <= 3.0 * se + 1e-9);
        }
    }
}

TEST_CASE("cd1_epoch") {
    SynthConfig small;
    small.num_inliers = 40;
    small.num_outliers = 0;
    const Dataset data = generate_synthetic(small, 5);

    SUBCASE("learning_rate 0 leaves parameters bit-identical") {
        Rng init(9);
        MvRbm model = MvRbm::init_random(data.schema, 4, 0.01, init);
        const Eigen::VectorXd a = model.visible_bias();
        const Eigen::VectorXd b = model.hidden_bias();
        const Eigen::MatrixXd w = model.weights();
        TrainConfig cfg;
        cfg.learning_rate = 0.0;
        cfg.batch_size = 8;
        Rng rng(10);
        cd1_epoch(model, data, cfg, rng);
        CHECK(model.visible_bias() == a);
        CHECK(model.hidden_bias() == b);
        CHECK(model.weights() == w);
    }
    SUBCASE("fixed seed gives identical parameters") {
        TrainConfig cfg;
        cfg.epochs = 3;
        cfg.seed = 21;
        const MvRbm m1 = train_rbm(data.schema, data, 4, cfg);
        const MvRbm m2 = train_rbm(data.schema, data, 4, cfg);
        CHECK(m1.visible_bias() == m2.visible_bias());
        CHECK(m1.hidden_bias() == m2.hidden_bias());
        CHECK(m1.weights() == m2.weights());
    }
    SUBCASE("training config is validated") {
        TrainConfig cfg;
        cfg.learning_rate = -1.0;
        CHECK_THROWS_AS(train_rbm(data.schema, data, 4, cfg), std::invalid_argument);
        cfg = {};
        cfg.batch_size = 0;
        CHECK_THROWS_AS(train_rbm(data.schema, data, 4, cfg), std::invalid_argument);
        cfg = {};
        cfg.epochs = 0;
        CHECK_THROWS_AS(train_rbm(data.schema, data, 4, cfg), std::invalid_argument);
    }
}

TEST_CASE("averaged CD-1 update aligns with the exact log-likelihood gradient") {
    // 3 visible, 2 hidden, binary; skewed data so the gradient is well away
    // from zero.
    const Schema schema = binary_schema(3);
    const std::vector<std::vector<double>> records{
        {1, 1, 0}, {1, 1, 0}, {1, 1, 0}, {1, 1, 1}, {0, 1, 0}, {0, 0, 0}};
    const Dataset data = dataset_from_rows(schema, records);

    for (std::uint64_t seed : {11u, 22u, 33u, 44u, 55u}) {
        Rng param_rng(seed);
        MvRbm base(schema, 2);
        std::normal_distribution<double> normal(0.0, 0.4);
        for (Eigen::Index d = 0; d < 3; ++d) base.visible_bias()[d] = normal(param_rng);
        for (Eigen::Index k = 0; k < 2; ++k) base.hidden_bias()[k] = normal(param_rng);
        for (Eigen::Index k = 0; k < 2; ++k)
            for (Eigen::Index d = 0; d < 3; ++d) base.weights()(d, k) = normal(param_rng);

        const oracle::FlatGradient grad = oracle::exact_loglik_gradient(base, records);

        TrainConfig cfg;
        cfg.learning_rate = 1.0;
        cfg.batch_size = static_cast<int>(records.size());  // one update per pass
        Rng pass_rng(seed * 7919);
        Eigen::VectorXd sum_da = Eigen::VectorXd::Zero(3);
        Eigen::VectorXd sum_db = Eigen::VectorXd::Zero(2);
        Eigen::MatrixXd sum_dw = Eigen::MatrixXd::Zero(3, 2);
        const int passes = 10000;
        const Eigen::MatrixXd encoded = encode_dataset(data);
        for (int pass = 0; pass < passes; ++pass) {
            MvRbm model = base;
            cd1_epoch_encoded(model, encoded, cfg, pass_rng);
            sum_da += model.visible_bias() - base.visible_bias();
            sum_db += model.hidden_bias() - base.hidden_bias();
            sum_dw += model.weights() - base.weights();
        }
        const double inner =
            grad.dot(sum_da / passes, sum_db / passes, sum_dw / passes);
        INFO("seed ", seed, " inner product ", inner);
        CHECK(inner > 0.0);
    }
}

TEST_CASE("exact-gradient oracle agrees with finite differences of log-likelihood") {
    // cross-check of the oracle itself: logL from brute-force free energies
    const Schema schema = binary_schema(3);
    const std::vector<std::vector<double>> records{{1, 1, 0}, {0, 1, 1}, {1, 0, 0}};
    Rng rng(17);
    MvRbm model = oracle::random_model(rng, schema, 2, 0.5);

    auto loglik = [&](const MvRbm& m) {
        // log P(x) = -F(x) - log Z with log Z = log sum_x exp(-F(x))
        const auto all = oracle::enumerate_discrete_records(schema);
        std::vector<double> neg_f;
        for (const auto& x : all) neg_f.push_back(-oracle::brute_force_free_energy(m, x));
        const double peak = *std::max_element(neg_f.begin(), neg_f.end());
        double z = 0.0;
        for (double v : neg_f) z += std::exp(v - peak);
        const double log_z = peak + std::log(z);
        double total = 0.0;
        for (const auto& x : records) total += -oracle::brute_force_free_energy(m, x) - log_z;
        return total;
    };

    const oracle::FlatGradient grad = oracle::exact_loglik_gradient(model, records);
    const double eps = 1e-6;
    auto check_fd = [&](double analytic, auto&& bump) {
        MvRbm plus = model, minus = model;
        bump(plus, eps);
        bump(minus, -eps);
        const double fd = (loglik(plus) - loglik(minus)) / (2.0 * eps);
        CHECK(analytic == doctest::Approx(fd).epsilon(1e-5));
    };
    check_fd(grad.visible_bias[1], [](MvRbm& m, double e) { m.visible_bias()[1] += e; });
    check_fd(grad.hidden_bias[0], [](MvRbm& m, double e) { m.hidden_bias()[0] += e; });
    check_fd(grad.weights(2, 1), [](MvRbm& m, double e) { m.weights()(2, 1) += e; });
}

TEST_CASE("train_rbm defaults follow the experimental settings") {
    TrainConfig cfg;
    CHECK(cfg.learning_rate == 0.3);
    CHECK(cfg.batch_size == 64);
    CHECK(cfg.epochs == 50);
    CHECK(cfg.weight_init_scale == 0.01);
}

TEST_CASE("training pulls a repeated record's free energy below random records") {
    Schema schema;
    schema.columns.push_back(col("b0", ColumnKind::Binary));
    schema.columns.push_back(col("b1", ColumnKind::Binary));
    schema.columns.push_back(col("g0", ColumnKind::Gaussian));
    schema.columns.push_back(col("n0", ColumnKind::Nominal, 3));

    const std::vector<double> target{1, 0, 0.75, 2};
    const Dataset data = dataset_from_rows(schema, std::vector<std::vector<double>>(32, target));

    Rng record_rng(808);
    std::vector<std::vector<double>> probes;
    for (int i = 0; i < 100; ++i) probes.push_back(oracle::random_record(record_rng, schema));

    auto gap = [&](const MvRbm& m) {
        double mean = 0.0;
        for (const auto& x : probes) mean += m.free_energy(x);
        return m.free_energy(target) - mean / 100.0;
    };

    TrainConfig cfg;
    cfg.seed = 7;
    Rng init(cfg.seed);
    const MvRbm before = MvRbm::init_random(schema, 4, cfg.weight_init_scale, init);
    const MvRbm after = train_rbm(schema, data, 4, cfg);

    const double gap_before = gap(before);
    const double gap_after = gap(after);
    CHECK(gap_after < gap_before);
    // regression pin, recorded at first implementation (seeded, deterministic)
    CHECK(gap_before == doctest::Approx(0.129158998949).epsilon(1e-6));
    CHECK(gap_after == doctest::Approx(-7.07468858488).epsilon(1e-6));
}

TEST_CASE("cd1 aborts on non-finite parameters with diagnostics") {
    const Schema schema = binary_schema(2);
    const Dataset data = dataset_from_rows(schema, {{1, 0}, {0, 1}});
    MvRbm model(schema, 2);
    model.weights()(0, 0) = std::numeric_limits<double>::quiet_NaN();
    TrainConfig cfg;
    Rng rng(1);
    CHECK_THROWS_WITH_AS(cd1_epoch(model, data, cfg, rng), doctest::Contains("non-finite"),
                         std::runtime_error);
}
