#include "doctest.h"
#include "oracles.hpp"

#include "jscc/mac_model.hpp"

using namespace jscc;
using doctest::Approx;

namespace {

double p_s(const SourceTriple& s, std::size_t a, std::size_t b, std::size_t c) {
    std::size_t idx[] = {a, b, c};
    return s.joint().prob(idx);
}

double w(const MacChannel& ch, unsigned x1, unsigned x2, unsigned x3, unsigned y) {
    std::size_t g[] = {x1, x2, x3};
    return ch.kernel().row(ch.kernel().given_flat(g))[y];
}

}  // namespace

TEST_SUITE("mac_model") {

TEST_CASE("example source") {
    auto s0 = example2_source(0.0, 0.3);
    auto m1 = marginalize(s0.joint(), {"S1"});
    CHECK(m1.values()[0] == 1.0);
    CHECK(p_s(s0, 0, 1, 1) == Approx(0.3));
    CHECK(p_s(s0, 0, 0, 0) == Approx(0.7));
    CHECK(p_s(s0, 0, 1, 0) == 0.0);

    auto z = example2_source(0.0, 0.0);
    CHECK(p_s(z, 0, 0, 0) == 1.0);

    auto s = example2_source(0.1, 0.3);
    CHECK(p_s(s, 0, 0, 0) == Approx(0.63).epsilon(1e-15));
    CHECK(p_s(s, 0, 1, 1) == Approx(0.27).epsilon(1e-15));
    CHECK(p_s(s, 1, 1, 0) == Approx(0.07).epsilon(1e-15));
    CHECK(p_s(s, 1, 0, 1) == Approx(0.03).epsilon(1e-15));
    int positive = 0;
    for (double v : s.joint().values()) positive += v > 0.0;
    CHECK(positive == 4);

    CHECK_THROWS_AS(example2_source(-0.1, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(example2_source(0.1, 1.3), std::invalid_argument);
}

TEST_CASE("example source invariants") {
    for (double sg : {0.0, 0.05, 0.3, 0.5, 0.9, 1.0})
        for (double gm : {0.0, 0.11, 0.5, 0.77}) {
            auto s = example2_source(sg, gm);
            double parity = 0.0;
            for (std::size_t a = 0; a < 2; ++a)
                for (std::size_t b = 0; b < 2; ++b) parity += p_s(s, a, b, a ^ b);
            CHECK(parity == Approx(1.0).epsilon(1e-15));
            CHECK(std::abs(mutual_information(s.joint(), {"S1"}, {"S3"})) < 1e-12);
        }
}

TEST_CASE("example channel rows") {
    auto c0 = example2_channel(NoiseSpec(0.0));
    CHECK(w(c0, 0, 0, 0, 0) == 0.5);
    CHECK(w(c0, 0, 0, 0, 1) == 0.5);
    CHECK(w(c0, 0, 0, 0, 2) == 0.0);
    CHECK(w(c0, 0, 0, 0, 3) == 0.0);

    auto c = example2_channel(NoiseSpec(0.125));
    for (unsigned y = 0; y < 4; ++y) CHECK(w(c, 1, 1, 0, y) == w(c, 0, 0, 0, y));
    CHECK(w(c, 0, 1, 1, 2) == Approx(0.375));
    CHECK(w(c, 0, 1, 1, 3) == Approx(0.5));
    CHECK(w(c, 0, 1, 1, 0) == Approx(0.125));
    CHECK(w(c, 0, 1, 1, 1) == 0.0);

    for (double d : {0.0, 0.1, 0.125, 0.3, 0.5}) {
        auto ch = example2_channel(NoiseSpec(d));
        for (unsigned a = 0; a < 2; ++a)
            for (unsigned b = 0; b < 2; ++b)
                for (unsigned x3 = 0; x3 < 2; ++x3) {
                    double sum = 0.0;
                    for (unsigned y = 0; y < 4; ++y) {
                        sum += w(ch, a, b, x3, y);
                        CHECK(w(ch, a, b, x3, y) == w(ch, a ^ 1, b ^ 1, x3, y));
                        CHECK(w(ch, a, b, x3, y) == Approx(oracle::example_channel(d, a, b, x3, y)).epsilon(1e-15));
                    }
                    CHECK(sum == Approx(1.0).epsilon(1e-15));
                }
    }
    CHECK(w(c0, 1, 1, 0, 2) == 0.0);
    CHECK(w(c0, 1, 1, 0, 3) == 0.0);
}

TEST_CASE("noise spec") {
    CHECK_THROWS_AS(NoiseSpec(0.25), std::invalid_argument);
    CHECK_THROWS_AS(NoiseSpec(-0.01), std::invalid_argument);
    CHECK_THROWS_AS(NoiseSpec(0.6), std::invalid_argument);
    NoiseSpec n(0.375);
    CHECK(n.pmf()[3] == 0.0);
    CHECK(n.entropy() == Approx(oracle::H({0.125, 0.5, 0.375})).epsilon(1e-15));
}

TEST_CASE("table constructors") {
    auto ex1 = table_source({2, 2, 2}, {0.25, 0, 0, 0.25, 0, 0.25, 0.25, 0});
    auto e2 = example2_source(0.5, 0.5);
    for (std::size_t i = 0; i < 8; ++i) CHECK(ex1.joint().values()[i] == Approx(e2.joint().values()[i]).epsilon(1e-15));

    CHECK_THROWS_AS(table_source({2, 2, 2}, {0.25, 0, 0, 0.25, 0, 0.25, 0.15, 0}), std::invalid_argument);
    CHECK_THROWS_AS(table_source({2, 2, 2}, {0.5, 0.5}), std::invalid_argument);
    // one row sums to 0.9
    std::vector<double> rows(8 * 2, 0.0);
    for (std::size_t r = 0; r < 8; ++r) rows[r * 2] = 1.0;
    rows[5 * 2] = 0.9;
    CHECK_THROWS_AS(table_channel({2, 2, 2}, 2, rows), std::invalid_argument);

    // Y = X3
    std::vector<double> idt(8 * 2, 0.0);
    for (std::size_t x = 0; x < 8; ++x) idt[x * 2 + (x & 1)] = 1.0;
    auto ch = table_channel({2, 2, 2}, 2, idt);
    std::mt19937_64 g(1);
    JointPmf px({Alphabet("X1", 2), Alphabet("X2", 2), Alphabet("X3", 2)}, oracle::random_pmf(8, g));
    auto j = compose(px, ch.kernel());
    CHECK(std::abs(conditional_entropy(j, {"Y"}, {"X3"})) < 1e-14);
    CHECK(ch.output_size() == 2);
    CHECK(ch.input_size(3) == 2);
}

TEST_CASE("json surface") {
    using nlohmann::json;
    auto s = source_from_json(json{{"type", "example2"}, {"sigma", "0.1"}, {"gamma", 0.3}});
    CHECK(p_s(s, 0, 0, 0) == Approx(0.63));
    auto t = source_from_json(json::parse(R"({"type":"table","alphabets":[2,2,2],"pmf":["0.25",0,0,0.25,0,0.25,0.25,0]})"));
    CHECK(p_s(t, 1, 1, 0) == Approx(0.25));
    auto c = channel_from_json(json{{"type", "example2"}, {"delta", "0.125"}});
    CHECK(w(c, 0, 1, 1, 2) == Approx(0.375));
    CHECK(parse_probability(json("0.5")) == 0.5);

    CHECK_THROWS_AS(source_from_json(json{{"type", "gauss"}}), std::invalid_argument);
    CHECK_THROWS_AS(source_from_json(json{{"type", "example2"}, {"sigma", 0.1}}), std::invalid_argument);
    CHECK_THROWS_AS(channel_from_json(json{{"type", "example2"}, {"delta", 0.25}}), std::invalid_argument);
    CHECK_THROWS_AS(parse_probability(json("0.5x")), std::invalid_argument);
    CHECK_THROWS_AS(parse_probability(json(true)), std::invalid_argument);
}

}  // TEST_SUITE
