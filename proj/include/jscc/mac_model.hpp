#pragma once

// Source triples and three-user discrete memoryless MACs.

#include <array>
#include "json.hpp"

#include "jscc/prob.hpp"

namespace jscc {

/// Joint law of (S1, S2, S3). Axes are named exactly S1, S2, S3 in that order.
class SourceTriple {
public:
    explicit SourceTriple(JointPmf joint);
    const JointPmf& joint() const noexcept { return joint_; }
    std::size_t alphabet_size(int user) const { return joint_.axes().at(static_cast<std::size_t>(user - 1)).size(); }

private:
    JointPmf joint_;
};

/// p(y | x1, x2, x3). Given axes X1, X2, X3; target axis Y.
class MacChannel {
public:
    explicit MacChannel(CondPmf kernel);
    const CondPmf& kernel() const noexcept { return kernel_; }
    std::size_t input_size(int user) const { return kernel_.given_axes().at(static_cast<std::size_t>(user - 1)).size(); }
    std::size_t output_size() const { return kernel_.target_size(); }

private:
    CondPmf kernel_;
};

/// Additive noise of the example channel: P(N = 0,1,2,3) = (1/2 - delta, 1/2, delta, 0).
class NoiseSpec {
public:
    /// Rejects delta outside [0, 1/2] and delta == 1/4.
    explicit NoiseSpec(double delta);
    double delta() const noexcept { return delta_; }
    std::array<double, 4> pmf() const noexcept { return {0.5 - delta_, 0.5, delta_, 0.0}; }
    double entropy() const { return entropy_of(pmf()); }

private:
    double delta_;
};

/// S1 ~ Be(sigma), S3 ~ Be(gamma) independent, S2 = S1 xor S3.
SourceTriple example2_source(double sigma, double gamma);

/// Binary inputs, Y = (X1 xor X2) + X3 + N (mod 4).
MacChannel example2_channel(const NoiseSpec& noise);

/// Table-driven constructors. `pmf` is row-major over (S1, S2, S3) and over
/// (X1, X2, X3; Y) respectively.
SourceTriple table_source(std::array<std::size_t, 3> alphabets, std::vector<double> pmf);
MacChannel table_channel(std::array<std::size_t, 3> input_alphabets, std::size_t output_alphabet,
                         std::vector<double> pmf);

/// Binary sigma * gamma = sigma (1 - gamma) + gamma (1 - sigma).
double binary_convolution(double a, double b) noexcept;

/// JSON config surface:
///   {"type":"example2","sigma":x,"gamma":y} | {"type":"table","alphabets":[a1,a2,a3],"pmf":[...]}
///   {"type":"example2","delta":d} | {"type":"table","alphabets":[x1,x2,x3,y],"pmf":[...]}
/// Probabilities may be numbers or decimal strings.
SourceTriple source_from_json(const nlohmann::json& j);
MacChannel channel_from_json(const nlohmann::json& j);

/// Reads a probability that is either a JSON number or a decimal string.
double parse_probability(const nlohmann::json& v);

}  // namespace jscc
