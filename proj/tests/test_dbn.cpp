#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "mixmad/dbn.hpp"
#include "mixmad/mvrbm.hpp"
#include "oracles.hpp"

using namespace mixmad;

namespace {

Schema mixed_schema() {
    Schema s;
    s.columns.push_back({"b", ColumnKind::Binary, 0, std::nan(""), std::nan("")});
    s.columns.push_back({"g", ColumnKind::Gaussian, 0, std::nan(""), std::nan("")});
    s.columns.push_back({"n", ColumnKind::Nominal, 3, std::nan(""), std::nan("")});
    return s;
}

AbstractionChain random_chain(Rng& rng, const Schema& base, int k1, int k2, double scale) {
    AbstractionChain chain;
    chain.append(oracle::random_model(rng, base, k1, scale));
    chain.append(oracle::random_model(rng, binary_schema(k1), k2, scale));
    return chain;
}

}  // namespace

TEST_CASE("chain append validates layer dimensions") {
    AbstractionChain chain;
    Rng rng(1);
    chain.append(oracle::random_model(rng, mixed_schema(), 4, 0.1));
    CHECK(chain.depth() == 1);
    SUBCASE("wrong width rejected") {
        CHECK_THROWS_AS(chain.append(MvRbm(binary_schema(5), 3)), std::invalid_argument);
    }
    SUBCASE("non-binary upper layer rejected") {
        CHECK_THROWS_AS(chain.append(MvRbm(mixed_schema(), 3)), std::invalid_argument);
    }
    SUBCASE("matching layer accepted") {
        chain.append(MvRbm(binary_schema(4), 3));
        CHECK(chain.depth() == 2);
    }
}

TEST_CASE("appending a layer never mutates existing layers") {
    Rng rng(2);
    AbstractionChain chain;
    chain.append(oracle::random_model(rng, mixed_schema(), 4, 0.3));
    const Eigen::VectorXd a = chain.layer(0).visible_bias();
    const Eigen::VectorXd b = chain.layer(0).hidden_bias();
    const Eigen::MatrixXd w = chain.layer(0).weights();
    chain.append(oracle::random_model(rng, binary_schema(4), 2, 0.3));
    CHECK(chain.layer(0).visible_bias() == a);
    CHECK(chain.layer(0).hidden_bias() == b);
    CHECK(chain.layer(0).weights() == w);
}

TEST_CASE("abstract_deterministic") {
    SUBCASE("all-zero parameters give 0.5 at any depth") {
        AbstractionChain chain;
        chain.append(MvRbm(mixed_schema(), 4));
        chain.append(MvRbm(binary_schema(4), 3));
        const std::vector<double> x{1, 0.4, 2};
        for (int depth : {1, 2}) {
            const Eigen::VectorXd h = chain.abstract_deterministic(x, depth);
            for (Eigen::Index i = 0; i < h.size(); ++i) CHECK(h[i] == 0.5);
        }
    }
    SUBCASE("depth 1 equals the sigmoid of the preactivation exactly") {
        Rng rng(3);
        AbstractionChain chain = random_chain(rng, mixed_schema(), 5, 3, 0.8);
        const std::vector<double> x = oracle::random_record(rng, mixed_schema());
        const Eigen::VectorXd z = chain.layer(0).hidden_preactivation(x);
        const Eigen::VectorXd h = chain.abstract_deterministic(x, 1);
        for (Eigen::Index k = 0; k < z.size(); ++k) CHECK(h[k] == sigmoid(z[k]));
    }
    SUBCASE("2-2-2 sizes match a straight-line recomputation to 1e-12") {
        Schema base;
        base.columns.push_back({"b0", ColumnKind::Binary, 0, std::nan(""), std::nan("")});
        base.columns.push_back({"b1", ColumnKind::Binary, 0, std::nan(""), std::nan("")});
        MvRbm l1(base, 2);
        l1.hidden_bias() << 0.3, -0.4;
        l1.weights() << 0.5, -0.2, 0.1, 0.7;
        MvRbm l2(binary_schema(2), 2);
        l2.hidden_bias() << -0.1, 0.6;
        l2.weights() << -0.3, 0.2, 0.4, -0.5;
        AbstractionChain chain;
        chain.append(l1);
        chain.append(l2);

        const double x0 = 1.0, x1 = 0.0;
        const auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
        const double h10 = sig(0.3 - (0.5 * x0 + 0.1 * x1));
        const double h11 = sig(-0.4 - (-0.2 * x0 + 0.7 * x1));
        const double h20 = sig(-0.1 - (-0.3 * h10 + 0.4 * h11));
        const double h21 = sig(0.6 - (0.2 * h10 + -0.5 * h11));

        const std::vector<double> x{x0, x1};
        const Eigen::VectorXd h = chain.abstract_deterministic(x, 2);
        CHECK(std::abs(h[0] - h20) <= 1e-12);
        CHECK(std::abs(h[1] - h21) <= 1e-12);
    }
    SUBCASE("outputs stay strictly inside (0,1)") {
        Rng rng(4);
        for (int trial = 0; trial < 20; ++trial) {
            AbstractionChain chain = random_chain(rng, mixed_schema(), 4, 3, 1.5);
            const std::vector<double> x = oracle::random_record(rng, mixed_schema());
            for (int depth : {1, 2}) {
                const Eigen::VectorXd h = chain.abstract_deterministic(x, depth);
                for (Eigen::Index i = 0; i < h.size(); ++i) {
                    CHECK(h[i] > 0.0);
                    CHECK(h[i] < 1.0);
                }
            }
        }
    }
    SUBCASE("depth out of range") {
        Rng rng(5);
        AbstractionChain chain = random_chain(rng, mixed_schema(), 4, 3, 0.2);
        const std::vector<double> x{0, 0.5, 1};
        CHECK_THROWS_AS(chain.abstract_deterministic(x, 0), std::invalid_argument);
        CHECK_THROWS_AS(chain.abstract_deterministic(x, 3), std::invalid_argument);
    }
}

TEST_CASE("abstract_stochastic") {
    SUBCASE("zero-parameter layer flips fair coins") {
        AbstractionChain chain;
        chain.append(MvRbm(mixed_schema(), 4));
        Rng rng(6);
        const std::vector<double> x{1, 0.2, 0};
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
        for (int i = 0; i < 10000; ++i) mean += chain.abstract_stochastic(x, 1, rng);
        mean /= 10000.0;
        for (Eigen::Index k = 0; k < 4; ++k) CHECK(mean[k] == doctest::Approx(0.5).epsilon(0.04));
    }
    SUBCASE("saturated upper-layer bias pins its bit") {
        Rng rng(7);
        AbstractionChain chain;
        chain.append(oracle::random_model(rng, mixed_schema(), 3, 0.2));
        MvRbm upper(binary_schema(3), 2);
        upper.hidden_bias() << 50.0, 0.0;
        chain.append(upper);
        const std::vector<double> x{0, 0.8, 1};
        int ones = 0;
        for (int i = 0; i < 1000; ++i) ones += chain.abstract_stochastic(x, 2, rng)[0] == 1.0;
        CHECK(ones >= 999);
    }
    SUBCASE("depth-2 per-bit means track the mean-field recursion") {
        Rng rng(8);
        // small weights keep the mean-field bias well under the monte-carlo
        // noise floor
        AbstractionChain chain = random_chain(rng, mixed_schema(), 3, 3, 0.15);
        const std::vector<double> x = oracle::random_record(rng, mixed_schema());
        const Eigen::VectorXd expected = chain.abstract_deterministic(x, 2);
        const int draws = 100000;
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
        for (int i = 0; i < draws; ++i) mean += chain.abstract_stochastic(x, 2, rng);
        mean /= double(draws);
        for (Eigen::Index k = 0; k < 3; ++k) {
            const double p = expected[k];
            const double se = std::sqrt(p * (1.0 - p) / draws);
            CHECK(std::abs(mean[k] - p) <= 3.0 * se + 2e-3);
        }
    }
    SUBCASE("returns exact bits") {
        Rng rng(9);
        AbstractionChain chain = random_chain(rng, mixed_schema(), 4, 3, 0.4);
        const std::vector<double> x = oracle::random_record(rng, mixed_schema());
        const Eigen::VectorXd h = chain.abstract_stochastic(x, 2, rng);
        for (Eigen::Index i = 0; i < h.size(); ++i) CHECK((h[i] == 0.0 || h[i] == 1.0));
    }
}

TEST_CASE("abstracted_free_energy") {
    SUBCASE("zero detector gives -K log 2") {
        MvRbm detector(binary_schema(5), 7);
        Eigen::VectorXd h(5);
        h << 0.1, 0.9, 0.5, 0.0, 1.0;
        CHECK(abstracted_free_energy(detector, h) ==
              doctest::Approx(-7.0 * std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("equals the generic free energy on 0/1 vectors") {
        Rng rng(10);
        for (int trial = 0; trial < 200; ++trial) {
            const int units = 2 + static_cast<int>(rng() % 6);
            const MvRbm detector =
                oracle::random_model(rng, binary_schema(units), 1 + static_cast<int>(rng() % 8), 0.9);
            std::vector<double> record(static_cast<std::size_t>(units));
            Eigen::VectorXd h(units);
            for (int i = 0; i < units; ++i) {
                record[static_cast<std::size_t>(i)] = (rng() % 2) ? 1.0 : 0.0;
                h[i] = record[static_cast<std::size_t>(i)];
            }
            CHECK(std::abs(abstracted_free_energy(detector, h) - detector.free_energy(record)) <=
                  1e-12);
        }
    }
    SUBCASE("matches brute-force enumeration on binary inputs") {
        Rng rng(11);
        for (int trial = 0; trial < 30; ++trial) {
            const MvRbm detector = oracle::random_model(rng, binary_schema(6), 8, 0.8);
            std::vector<double> record(6);
            Eigen::VectorXd h(6);
            for (int i = 0; i < 6; ++i) {
                record[static_cast<std::size_t>(i)] = (rng() % 2) ? 1.0 : 0.0;
                h[i] = record[static_cast<std::size_t>(i)];
            }
            const double expected = oracle::brute_force_free_energy(detector, record);
            CHECK(std::abs(abstracted_free_energy(detector, h) - expected) <= 1e-9);
        }
    }
    SUBCASE("dimension mismatch rejected") {
        MvRbm detector(binary_schema(4), 3);
        CHECK_THROWS_AS(abstracted_free_energy(detector, Eigen::VectorXd::Zero(5)),
                        std::invalid_argument);
    }
    SUBCASE("mixed detector rejected") {
        MvRbm detector(mixed_schema(), 3);
        CHECK_THROWS_AS(abstracted_free_energy(detector, Eigen::VectorXd::Zero(detector.encoded_dim())),
                        std::invalid_argument);
    }
}
