#include "jscc/mac_model.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace jscc {

namespace {

void check_unit(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
}

std::vector<Alphabet> source_axes(std::array<std::size_t, 3> sizes) {
    return {Alphabet("S1", sizes[0]), Alphabet("S2", sizes[1]), Alphabet("S3", sizes[2])};
}

std::vector<Alphabet> input_axes(std::array<std::size_t, 3> sizes) {
    return {Alphabet("X1", sizes[0]), Alphabet("X2", sizes[1]), Alphabet("X3", sizes[2])};
}

}  // namespace

SourceTriple::SourceTriple(JointPmf joint) : joint_(std::move(joint)) {
    const auto& ax = joint_.axes();
    if (ax.size() != 3 || ax[0].name() != "S1" || ax[1].name() != "S2" || ax[2].name() != "S3")
        throw std::invalid_argument("SourceTriple: axes must be S1, S2, S3");
}

MacChannel::MacChannel(CondPmf kernel) : kernel_(std::move(kernel)) {
    const auto& g = kernel_.given_axes();
    const auto& t = kernel_.target_axes();
    if (g.size() != 3 || g[0].name() != "X1" || g[1].name() != "X2" || g[2].name() != "X3" ||
        t.size() != 1 || t[0].name() != "Y")
        throw std::invalid_argument("MacChannel: kernel must be p(Y | X1, X2, X3)");
}

NoiseSpec::NoiseSpec(double delta) : delta_(delta) {
    if (!(delta >= 0.0 && delta <= 0.5)) throw std::invalid_argument("delta must lie in [0, 1/2]");
    if (delta == 0.25) throw std::invalid_argument("delta = 1/4 is excluded");
}

double binary_convolution(double a, double b) noexcept { return a * (1.0 - b) + b * (1.0 - a); }

SourceTriple example2_source(double sigma, double gamma) {
    check_unit(sigma, "sigma");
    check_unit(gamma, "gamma");
    std::vector<double> p(8, 0.0);
    for (std::size_t s1 = 0; s1 < 2; ++s1) {
        for (std::size_t s3 = 0; s3 < 2; ++s3) {
            const std::size_t s2 = s1 ^ s3;
            p[s1 * 4 + s2 * 2 + s3] = (s1 ? sigma : 1.0 - sigma) * (s3 ? gamma : 1.0 - gamma);
        }
    }
    return SourceTriple(JointPmf(source_axes({2, 2, 2}), std::move(p)));
}

MacChannel example2_channel(const NoiseSpec& noise) {
    const auto n = noise.pmf();
    std::vector<double> v(8 * 4, 0.0);
    for (std::size_t x1 = 0; x1 < 2; ++x1)
        for (std::size_t x2 = 0; x2 < 2; ++x2)
            for (std::size_t x3 = 0; x3 < 2; ++x3) {
                const std::size_t shift = ((x1 ^ x2) + x3) % 4;
                const std::size_t row = x1 * 4 + x2 * 2 + x3;
                for (std::size_t y = 0; y < 4; ++y) v[row * 4 + y] = n[(y + 4 - shift) % 4];
            }
    return MacChannel(CondPmf(input_axes({2, 2, 2}), {Alphabet("Y", 4)}, std::move(v)));
}

SourceTriple table_source(std::array<std::size_t, 3> alphabets, std::vector<double> pmf) {
    return SourceTriple(JointPmf(source_axes(alphabets), std::move(pmf)));
}

MacChannel table_channel(std::array<std::size_t, 3> input_alphabets, std::size_t output_alphabet,
                         std::vector<double> pmf) {
    return MacChannel(CondPmf(input_axes(input_alphabets), {Alphabet("Y", output_alphabet)}, std::move(pmf)));
}

double parse_probability(const nlohmann::json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        double out = 0.0;
        const auto* first = s.data();
        const auto* last = s.data() + s.size();
        auto [ptr, ec] = std::from_chars(first, last, out);
        if (ec != std::errc() || ptr != last) throw std::invalid_argument("malformed probability '" + s + "'");
        return out;
    }
    throw std::invalid_argument("probability must be a number or a decimal string");
}

namespace {

std::vector<double> parse_pmf_array(const nlohmann::json& j) {
    if (!j.is_array()) throw std::invalid_argument("'pmf' must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(parse_probability(v));
    return out;
}

std::vector<std::size_t> parse_sizes(const nlohmann::json& j, std::size_t expected) {
    if (!j.is_array() || j.size() != expected)
        throw std::invalid_argument("'alphabets' must be an array of " + std::to_string(expected) + " sizes");
    std::vector<std::size_t> out;
    for (const auto& v : j) {
        if (!v.is_number_integer() || v.get<long long>() < 1)
            throw std::invalid_argument("alphabet sizes must be positive integers");
        out.push_back(v.get<std::size_t>());
    }
    return out;
}

const nlohmann::json& require(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        throw std::invalid_argument(std::string("missing key '") + key + "'");
    return j.at(key);
}

}  // namespace

SourceTriple source_from_json(const nlohmann::json& j) {
    const auto type = require(j, "type").get<std::string>();
    if (type == "example2")
        return example2_source(parse_probability(require(j, "sigma")), parse_probability(require(j, "gamma")));
    if (type == "table") {
        const auto s = parse_sizes(require(j, "alphabets"), 3);
        return table_source({s[0], s[1], s[2]}, parse_pmf_array(require(j, "pmf")));
    }
    throw std::invalid_argument("unknown source type '" + type + "'");
}

MacChannel channel_from_json(const nlohmann::json& j) {
    const auto type = require(j, "type").get<std::string>();
    if (type == "example2") return example2_channel(NoiseSpec(parse_probability(require(j, "delta"))));
    if (type == "table") {
        const auto s = parse_sizes(require(j, "alphabets"), 4);
        return table_channel({s[0], s[1], s[2]}, s[3], parse_pmf_array(require(j, "pmf")));
    }
    throw std::invalid_argument("unknown channel type '" + type + "'");
}

}  // namespace jscc
