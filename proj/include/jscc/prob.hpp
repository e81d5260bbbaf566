#pragma once

// Exact finite-probability algebra over named axes.
//
// Every distribution in the library is a dense table over the Cartesian
// product of small alphabets. Axes are always addressed by name, never by
// position, so callers can permute roles freely.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace jscc {

inline constexpr std::size_t kMaxAlphabetSize = 16;
inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kInfoClampTolerance = 1e-12;

class Alphabet {
public:
    Alphabet(std::string name, std::size_t size, std::vector<std::string> labels = {});

    const std::string& name() const noexcept { return name_; }
    std::size_t size() const noexcept { return size_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    bool operator==(const Alphabet& other) const = default;

private:
    std::string name_;
    std::size_t size_;
    std::vector<std::string> labels_;
};

/// Set of axis names. Keeps insertion order, rejects duplicates silently.
class VarSet {
public:
    VarSet() = default;
    VarSet(std::initializer_list<std::string_view> names);
    explicit VarSet(std::vector<std::string> names);

    const std::vector<std::string>& names() const noexcept { return names_; }
    std::size_t size() const noexcept { return names_.size(); }
    bool empty() const noexcept { return names_.empty(); }
    bool contains(std::string_view name) const;
    bool disjoint(const VarSet& other) const;

    VarSet& add(std::string_view name);
    VarSet operator|(const VarSet& other) const;

private:
    std::vector<std::string> names_;
};

class CondPmf;

/// Dense joint PMF. Row-major over the axes: the last axis varies fastest.
class JointPmf {
public:
    JointPmf(std::vector<Alphabet> axes, std::vector<double> values);

    static JointPmf uniform(std::vector<Alphabet> axes);
    static JointPmf point_mass(std::vector<Alphabet> axes, std::span<const std::size_t> index);

    const std::vector<Alphabet>& axes() const noexcept { return axes_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t rank() const noexcept { return axes_.size(); }
    std::size_t size() const noexcept { return values_.size(); }

    bool has_axis(std::string_view name) const;
    /// Throws std::invalid_argument for an unknown name.
    std::size_t axis_index(std::string_view name) const;
    const Alphabet& axis(std::string_view name) const { return axes_[axis_index(name)]; }
    std::vector<std::size_t> strides() const;

    double prob(std::span<const std::size_t> index) const;

private:
    struct Trusted {};
    JointPmf(Trusted, std::vector<Alphabet> axes, std::vector<double> values);

    friend JointPmf marginalize(const JointPmf&, const VarSet&);
    friend class CondPmf;
    friend JointPmf compose(const JointPmf&, const CondPmf&);
    friend JointPmf attach_function(const JointPmf&, const VarSet&,
                                    const std::function<std::size_t(std::span<const std::size_t>)>&,
                                    const Alphabet&);

    std::vector<Alphabet> axes_;
    std::vector<double> values_;
};

/// One PMF over `target_axes` for every configuration of `given_axes`.
/// Storage is given-major: values[g * target_size + t].
class CondPmf {
public:
    CondPmf(std::vector<Alphabet> given_axes, std::vector<Alphabet> target_axes,
            std::vector<double> values);

    /// Deterministic kernel: target = f(given), where f returns a flat target index.
    static CondPmf deterministic(std::vector<Alphabet> given_axes, std::vector<Alphabet> target_axes,
                                 const std::function<std::size_t(std::span<const std::size_t>)>& f);
    /// Same PMF in every row.
    static CondPmf constant(std::vector<Alphabet> given_axes, std::vector<Alphabet> target_axes,
                            std::span<const double> pmf);

    const std::vector<Alphabet>& given_axes() const noexcept { return given_; }
    const std::vector<Alphabet>& target_axes() const noexcept { return target_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t given_size() const noexcept { return given_size_; }
    std::size_t target_size() const noexcept { return target_size_; }

    std::span<const double> row(std::size_t given_flat) const;
    void set_row(std::size_t given_flat, std::span<const double> pmf);

    /// Flat index of a given-configuration from per-axis symbols.
    std::size_t given_flat(std::span<const std::size_t> given_index) const;

    bool operator==(const CondPmf& other) const = default;

private:
    std::vector<Alphabet> given_;
    std::vector<Alphabet> target_;
    std::vector<double> values_;
    std::size_t given_size_ = 1;
    std::size_t target_size_ = 1;
};

/// Kept axes stay in the joint's order, not the order of `keep`.
JointPmf marginalize(const JointPmf& joint, const VarSet& keep);

/// p(a, b) = joint(a) * kernel(b | a restricted to the kernel's given axes).
JointPmf compose(const JointPmf& joint, const CondPmf& kernel);

/// Appends a deterministic axis new_axis = f(src). `f` receives the symbols of
/// `src` in the VarSet's order and must return a value below new_axis.size().
JointPmf attach_function(const JointPmf& joint, const VarSet& src,
                         const std::function<std::size_t(std::span<const std::size_t>)>& f,
                         const Alphabet& new_axis);

double entropy(const JointPmf& joint, const VarSet& vars);
double conditional_entropy(const JointPmf& joint, const VarSet& vars, const VarSet& given);
double mutual_information(const JointPmf& joint, const VarSet& a, const VarSet& b);
double conditional_mutual_information(const JointPmf& joint, const VarSet& a, const VarSet& b,
                                      const VarSet& c);

double binary_entropy(double p);
/// Lower branch: the unique p in [0, 1/2] with h(p) = y.
double inverse_binary_entropy(double y);

/// Shannon entropy in bits of a plain PMF vector (0 log 0 = 0).
double entropy_of(std::span<const double> pmf);

/// Entropies of arbitrary axis subsets of one fixed joint, computed from its
/// support and memoized per subset. Many inequality families query the same
/// subsets, so this is the engine behind the region evaluators.
/// Not thread-safe: the memo is mutated on lookup.
class EntropyCache {
public:
    explicit EntropyCache(const JointPmf& joint);

    double entropy(const VarSet& vars);
    double conditional_entropy(const VarSet& vars, const VarSet& given);
    double mutual_information(const VarSet& a, const VarSet& b, const VarSet& c);

    std::size_t support_size() const noexcept { return probs_.size(); }

private:
    std::uint64_t mask_of(const VarSet& vars) const;
    double entropy_of_mask(std::uint64_t mask);

    std::vector<Alphabet> axes_;
    std::vector<std::uint8_t> cells_;  // support_size x rank symbol table
    std::vector<double> probs_;
    std::unordered_map<std::uint64_t, double> memo_;
    std::vector<double> scratch_;
    std::vector<std::size_t> touched_;
};

}  // namespace jscc
