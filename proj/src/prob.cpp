#include "jscc/prob.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace jscc {

namespace {

std::size_t product_size(const std::vector<Alphabet>& axes) {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.size();
    return n;
}

void check_distinct_names(const std::vector<Alphabet>& axes, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& a : axes) {
        if (!seen.insert(a.name()).second)
            throw std::invalid_argument(std::string(what) + ": duplicate axis name '" + a.name() + "'");
    }
}

void check_pmf_entries(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!(v >= 0.0) || v > 1.0 + kNormTolerance)
            throw std::invalid_argument(std::string(what) + ": entry outside [0,1]");
    }
}

double plogp_sum(std::span<const double> pmf) {
    double h = 0.0;
    for (double p : pmf)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

double clamp_info(double v) { return (v < 0.0 && v >= -kInfoClampTolerance) ? 0.0 : v; }

// Positions of `vars` inside `joint`, validated.
std::vector<std::size_t> positions_of(const JointPmf& joint, const VarSet& vars) {
    std::vector<std::size_t> pos;
    pos.reserve(vars.size());
    for (const auto& n : vars.names()) pos.push_back(joint.axis_index(n));
    return pos;
}

// Iterates the row-major odometer over `sizes`, calling fn(flat, index).
template <class Fn>
void for_each_index(const std::vector<std::size_t>& sizes, Fn&& fn) {
    std::vector<std::size_t> idx(sizes.size(), 0);
    std::size_t total = 1;
    for (auto s : sizes) total *= s;
    for (std::size_t flat = 0; flat < total; ++flat) {
        fn(flat, std::span<const std::size_t>(idx));
        for (std::size_t d = sizes.size(); d-- > 0;) {
            if (++idx[d] < sizes[d]) break;
            idx[d] = 0;
        }
    }
}

std::vector<std::size_t> sizes_of(const std::vector<Alphabet>& axes) {
    std::vector<std::size_t> s;
    s.reserve(axes.size());
    for (const auto& a : axes) s.push_back(a.size());
    return s;
}

}  // namespace

// ---------------------------------------------------------------- Alphabet

Alphabet::Alphabet(std::string name, std::size_t size, std::vector<std::string> labels)
    : name_(std::move(name)), size_(size), labels_(std::move(labels)) {
    if (name_.empty()) throw std::invalid_argument("Alphabet: empty name");
    if (size_ < 1) throw std::invalid_argument("Alphabet '" + name_ + "': size must be >= 1");
    if (size_ > kMaxAlphabetSize)
        throw std::invalid_argument("Alphabet '" + name_ + "': size exceeds per-axis cap");
    if (!labels_.empty()) {
        if (labels_.size() != size_)
            throw std::invalid_argument("Alphabet '" + name_ + "': label count != size");
        std::unordered_set<std::string> seen(labels_.begin(), labels_.end());
        if (seen.size() != labels_.size())
            throw std::invalid_argument("Alphabet '" + name_ + "': labels not distinct");
    }
}

// ------------------------------------------------------------------ VarSet

VarSet::VarSet(std::initializer_list<std::string_view> names) {
    for (auto n : names) add(n);
}

VarSet::VarSet(std::vector<std::string> names) {
    for (const auto& n : names) add(n);
}

bool VarSet::contains(std::string_view name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

bool VarSet::disjoint(const VarSet& other) const {
    return std::none_of(names_.begin(), names_.end(),
                        [&](const std::string& n) { return other.contains(n); });
}

VarSet& VarSet::add(std::string_view name) {
    if (!contains(name)) names_.emplace_back(name);
    return *this;
}

VarSet VarSet::operator|(const VarSet& other) const {
    VarSet out = *this;
    for (const auto& n : other.names_) out.add(n);
    return out;
}

// ---------------------------------------------------------------- JointPmf

JointPmf::JointPmf(std::vector<Alphabet> axes, std::vector<double> values)
    : axes_(std::move(axes)), values_(std::move(values)) {
    check_distinct_names(axes_, "JointPmf");
    if (values_.size() != product_size(axes_))
        throw std::invalid_argument("JointPmf: value count does not match the axes");
    check_pmf_entries(values_, "JointPmf");
    const double total = std::accumulate(values_.begin(), values_.end(), 0.0);
    if (std::abs(total - 1.0) > kNormTolerance)
        throw std::invalid_argument("JointPmf: entries do not sum to 1");
}

JointPmf::JointPmf(Trusted, std::vector<Alphabet> axes, std::vector<double> values)
    : axes_(std::move(axes)), values_(std::move(values)) {}

JointPmf JointPmf::uniform(std::vector<Alphabet> axes) {
    const auto n = product_size(axes);
    return JointPmf(std::move(axes), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

JointPmf JointPmf::point_mass(std::vector<Alphabet> axes, std::span<const std::size_t> index) {
    if (index.size() != axes.size()) throw std::invalid_argument("point_mass: index rank mismatch");
    std::vector<double> v(product_size(axes), 0.0);
    std::size_t flat = 0;
    for (std::size_t d = 0; d < axes.size(); ++d) {
        if (index[d] >= axes[d].size()) throw std::invalid_argument("point_mass: symbol out of range");
        flat = flat * axes[d].size() + index[d];
    }
    v[flat] = 1.0;
    return JointPmf(std::move(axes), std::move(v));
}

bool JointPmf::has_axis(std::string_view name) const {
    return std::any_of(axes_.begin(), axes_.end(), [&](const Alphabet& a) { return a.name() == name; });
}

std::size_t JointPmf::axis_index(std::string_view name) const {
    for (std::size_t i = 0; i < axes_.size(); ++i)
        if (axes_[i].name() == name) return i;
    throw std::invalid_argument("unknown axis '" + std::string(name) + "'");
}

std::vector<std::size_t> JointPmf::strides() const {
    std::vector<std::size_t> s(axes_.size(), 1);
    for (std::size_t d = axes_.size(); d-- > 1;) s[d - 1] = s[d] * axes_[d].size();
    return s;
}

double JointPmf::prob(std::span<const std::size_t> index) const {
    if (index.size() != axes_.size()) throw std::invalid_argument("prob: index rank mismatch");
    std::size_t flat = 0;
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        if (index[d] >= axes_[d].size()) throw std::invalid_argument("prob: symbol out of range");
        flat = flat * axes_[d].size() + index[d];
    }
    return values_[flat];
}

// ----------------------------------------------------------------- CondPmf

CondPmf::CondPmf(std::vector<Alphabet> given_axes, std::vector<Alphabet> target_axes,
                 std::vector<double> values)
    : given_(std::move(given_axes)), target_(std::move(target_axes)), values_(std::move(values)) {
    if (target_.empty()) throw std::invalid_argument("CondPmf: no target axes");
    std::vector<Alphabet> all = given_;
    all.insert(all.end(), target_.begin(), target_.end());
    check_distinct_names(all, "CondPmf");
    given_size_ = product_size(given_);
    target_size_ = product_size(target_);
    if (values_.size() != given_size_ * target_size_)
        throw std::invalid_argument("CondPmf: value count does not match the axes");
    check_pmf_entries(values_, "CondPmf");
    for (std::size_t g = 0; g < given_size_; ++g) {
        const auto r = row(g);
        const double total = std::accumulate(r.begin(), r.end(), 0.0);
        if (std::abs(total - 1.0) > kNormTolerance)
            throw std::invalid_argument("CondPmf: row " + std::to_string(g) + " does not sum to 1");
    }
}

CondPmf CondPmf::deterministic(std::vector<Alphabet> given_axes, std::vector<Alphabet> target_axes,
                               const std::function<std::size_t(std::span<const std::size_t>)>& f) {
    const auto gsize = product_size(given_axes);
    const auto tsize = product_size(target_axes);
    std::vector<double> v(gsize * tsize, 0.0);
    for_each_index(sizes_of(given_axes), [&](std::size_t g, std::span<const std::size_t> idx) {
        const auto t = f(idx);
        if (t >= tsize) throw std::invalid_argument("CondPmf::deterministic: map output out of range");
        v[g * tsize + t] = 1.0;
    });
    return CondPmf(std::move(given_axes), std::move(target_axes), std::move(v));
}

CondPmf CondPmf::constant(std::vector<Alphabet> given_axes, std::vector<Alphabet> target_axes,
                          std::span<const double> pmf) {
    const auto gsize = product_size(given_axes);
    std::vector<double> v;
    v.reserve(gsize * pmf.size());
    for (std::size_t g = 0; g < gsize; ++g) v.insert(v.end(), pmf.begin(), pmf.end());
    return CondPmf(std::move(given_axes), std::move(target_axes), std::move(v));
}

std::span<const double> CondPmf::row(std::size_t g) const {
    if (g >= given_size_) throw std::out_of_range("CondPmf::row");
    return std::span<const double>(values_).subspan(g * target_size_, target_size_);
}

void CondPmf::set_row(std::size_t g, std::span<const double> pmf) {
    if (g >= given_size_) throw std::out_of_range("CondPmf::set_row");
    if (pmf.size() != target_size_) throw std::invalid_argument("CondPmf::set_row: size mismatch");
    check_pmf_entries(pmf, "CondPmf::set_row");
    const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    if (std::abs(total - 1.0) > kNormTolerance)
        throw std::invalid_argument("CondPmf::set_row: row does not sum to 1");
    std::copy(pmf.begin(), pmf.end(), values_.begin() + static_cast<std::ptrdiff_t>(g * target_size_));
}

std::size_t CondPmf::given_flat(std::span<const std::size_t> given_index) const {
    if (given_index.size() != given_.size()) throw std::invalid_argument("given_flat: rank mismatch");
    std::size_t flat = 0;
    for (std::size_t d = 0; d < given_.size(); ++d) {
        if (given_index[d] >= given_[d].size()) throw std::invalid_argument("given_flat: out of range");
        flat = flat * given_[d].size() + given_index[d];
    }
    return flat;
}

// -------------------------------------------------------------- operations

JointPmf marginalize(const JointPmf& joint, const VarSet& keep) {
    const auto pos = positions_of(joint, keep);
    std::vector<bool> kept(joint.rank(), false);
    for (auto p : pos) kept[p] = true;

    std::vector<Alphabet> out_axes;
    for (std::size_t d = 0; d < joint.rank(); ++d)
        if (kept[d]) out_axes.push_back(joint.axes()[d]);

    // Stride of each source axis inside the output table (0 when summed out).
    std::vector<std::size_t> out_stride(joint.rank(), 0);
    std::size_t s = 1;
    for (std::size_t d = joint.rank(); d-- > 0;) {
        if (kept[d]) {
            out_stride[d] = s;
            s *= joint.axes()[d].size();
        }
    }
    std::vector<double> out(s, 0.0);
    const auto vals = joint.values();
    for_each_index(sizes_of(joint.axes()), [&](std::size_t flat, std::span<const std::size_t> idx) {
        std::size_t o = 0;
        for (std::size_t d = 0; d < idx.size(); ++d) o += idx[d] * out_stride[d];
        out[o] += vals[flat];
    });
    return JointPmf(JointPmf::Trusted{}, std::move(out_axes), std::move(out));
}

JointPmf compose(const JointPmf& joint, const CondPmf& kernel) {
    std::vector<std::size_t> given_pos;
    for (const auto& a : kernel.given_axes()) {
        const auto p = joint.axis_index(a.name());
        if (joint.axes()[p].size() != a.size())
            throw std::invalid_argument("compose: dimension mismatch on axis '" + a.name() + "'");
        given_pos.push_back(p);
    }
    for (const auto& a : kernel.target_axes())
        if (joint.has_axis(a.name()))
            throw std::invalid_argument("compose: axis collision on '" + a.name() + "'");

    std::vector<std::size_t> given_stride(joint.rank(), 0);
    {
        std::size_t s = 1;
        for (std::size_t k = kernel.given_axes().size(); k-- > 0;) {
            given_stride[given_pos[k]] = s;
            s *= kernel.given_axes()[k].size();
        }
    }
    const auto t_size = kernel.target_size();
    std::vector<double> out(joint.size() * t_size, 0.0);
    const auto vals = joint.values();
    const auto kv = kernel.values();
    for_each_index(sizes_of(joint.axes()), [&](std::size_t flat, std::span<const std::size_t> idx) {
        const double p = vals[flat];
        if (p == 0.0) return;
        std::size_t g = 0;
        for (std::size_t d = 0; d < idx.size(); ++d) g += idx[d] * given_stride[d];
        for (std::size_t t = 0; t < t_size; ++t) out[flat * t_size + t] = p * kv[g * t_size + t];
    });
    std::vector<Alphabet> axes = joint.axes();
    axes.insert(axes.end(), kernel.target_axes().begin(), kernel.target_axes().end());
    return JointPmf(JointPmf::Trusted{}, std::move(axes), std::move(out));
}

JointPmf attach_function(const JointPmf& joint, const VarSet& src,
                         const std::function<std::size_t(std::span<const std::size_t>)>& f,
                         const Alphabet& new_axis) {
    const auto pos = positions_of(joint, src);
    if (joint.has_axis(new_axis.name()))
        throw std::invalid_argument("attach_function: axis collision on '" + new_axis.name() + "'");
    const auto k = new_axis.size();
    std::vector<double> out(joint.size() * k, 0.0);
    std::vector<std::size_t> arg(pos.size());
    const auto vals = joint.values();
    for_each_index(sizes_of(joint.axes()), [&](std::size_t flat, std::span<const std::size_t> idx) {
        for (std::size_t i = 0; i < pos.size(); ++i) arg[i] = idx[pos[i]];
        std::size_t y;
        try {
            y = f(arg);
        } catch (const std::exception& e) {
            throw std::invalid_argument(std::string("attach_function: map not total: ") + e.what());
        }
        if (y >= k) throw std::invalid_argument("attach_function: map value outside the new alphabet");
        out[flat * k + y] = vals[flat];
    });
    std::vector<Alphabet> axes = joint.axes();
    axes.push_back(new_axis);
    return JointPmf(JointPmf::Trusted{}, std::move(axes), std::move(out));
}

double entropy_of(std::span<const double> pmf) { return clamp_info(plogp_sum(pmf)); }

double entropy(const JointPmf& joint, const VarSet& vars) {
    const auto pos = positions_of(joint, vars);
    std::vector<std::size_t> stride(joint.rank(), 0);
    std::size_t s = 1;
    for (std::size_t k = pos.size(); k-- > 0;) {
        stride[pos[k]] = s;
        s *= joint.axes()[pos[k]].size();
    }
    std::vector<double> marg(s, 0.0);
    const auto vals = joint.values();
    for_each_index(sizes_of(joint.axes()), [&](std::size_t flat, std::span<const std::size_t> idx) {
        std::size_t o = 0;
        for (std::size_t d = 0; d < idx.size(); ++d) o += idx[d] * stride[d];
        marg[o] += vals[flat];
    });
    return clamp_info(plogp_sum(marg));
}

double conditional_entropy(const JointPmf& joint, const VarSet& vars, const VarSet& given) {
    return clamp_info(entropy(joint, vars | given) - entropy(joint, given));
}

double mutual_information(const JointPmf& joint, const VarSet& a, const VarSet& b) {
    return conditional_mutual_information(joint, a, b, {});
}

double conditional_mutual_information(const JointPmf& joint, const VarSet& a, const VarSet& b,
                                      const VarSet& c) {
    if (!a.disjoint(b) || !a.disjoint(c) || !b.disjoint(c))
        throw std::invalid_argument("conditional_mutual_information: overlapping variable sets");
    const double v = entropy(joint, a | c) + entropy(joint, b | c) - entropy(joint, a | b | c) -
                     entropy(joint, c);
    return clamp_info(v);
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binary_entropy: p outside [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double inverse_binary_entropy(double y) {
    if (!(y >= 0.0 && y <= 1.0)) throw std::domain_error("inverse_binary_entropy: y outside [0,1]");
    if (y == 0.0) return 0.0;
    if (y == 1.0) return 0.5;
    double lo = 0.0, hi = 0.5;
    // h is strictly increasing on [0, 1/2].
    while (hi - lo > 1e-15) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (binary_entropy(mid) < y)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// ------------------------------------------------------------ EntropyCache

EntropyCache::EntropyCache(const JointPmf& joint) : axes_(joint.axes()) {
    if (axes_.size() > 64) throw std::invalid_argument("EntropyCache: more than 64 axes");
    const auto vals = joint.values();
    const auto rank = axes_.size();
    for_each_index(sizes_of(axes_), [&](std::size_t flat, std::span<const std::size_t> idx) {
        if (vals[flat] <= 0.0) return;
        probs_.push_back(vals[flat]);
        for (std::size_t d = 0; d < rank; ++d) cells_.push_back(static_cast<std::uint8_t>(idx[d]));
    });
}

std::uint64_t EntropyCache::mask_of(const VarSet& vars) const {
    std::uint64_t m = 0;
    for (const auto& n : vars.names()) {
        bool found = false;
        for (std::size_t d = 0; d < axes_.size(); ++d) {
            if (axes_[d].name() == n) {
                m |= std::uint64_t{1} << d;
                found = true;
                break;
            }
        }
        if (!found) throw std::invalid_argument("unknown axis '" + n + "'");
    }
    return m;
}

double EntropyCache::entropy_of_mask(std::uint64_t mask) {
    if (auto it = memo_.find(mask); it != memo_.end()) return it->second;

    const auto rank = axes_.size();
    std::vector<std::size_t> dims;
    std::vector<std::size_t> stride;
    std::size_t total = 1;
    for (std::size_t d = rank; d-- > 0;) {
        if (mask >> d & 1U) {
            dims.push_back(d);
            stride.push_back(total);
            total *= axes_[d].size();
        }
    }
    double h = 0.0;
    if (total <= (std::size_t{1} << 22)) {
        if (scratch_.size() < total) scratch_.assign(total, 0.0);
        touched_.clear();
        for (std::size_t c = 0; c < probs_.size(); ++c) {
            const std::uint8_t* cell = &cells_[c * rank];
            std::size_t key = 0;
            for (std::size_t k = 0; k < dims.size(); ++k) key += cell[dims[k]] * stride[k];
            if (scratch_[key] == 0.0) touched_.push_back(key);
            scratch_[key] += probs_[c];
        }
        std::sort(touched_.begin(), touched_.end());
        for (auto key : touched_) {
            const double p = scratch_[key];
            if (p > 0.0) h -= p * std::log2(p);
            scratch_[key] = 0.0;
        }
    } else {
        std::vector<std::pair<std::size_t, double>> keyed;
        keyed.reserve(probs_.size());
        for (std::size_t c = 0; c < probs_.size(); ++c) {
            const std::uint8_t* cell = &cells_[c * rank];
            std::size_t key = 0;
            for (std::size_t k = 0; k < dims.size(); ++k) key += cell[dims[k]] * stride[k];
            keyed.emplace_back(key, probs_[c]);
        }
        std::stable_sort(keyed.begin(), keyed.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 0; i < keyed.size();) {
            double p = 0.0;
            std::size_t j = i;
            for (; j < keyed.size() && keyed[j].first == keyed[i].first; ++j) p += keyed[j].second;
            if (p > 0.0) h -= p * std::log2(p);
            i = j;
        }
    }
    memo_.emplace(mask, h);
    return h;
}

double EntropyCache::entropy(const VarSet& vars) { return entropy_of_mask(mask_of(vars)); }

double EntropyCache::conditional_entropy(const VarSet& vars, const VarSet& given) {
    const auto g = mask_of(given);
    return clamp_info(entropy_of_mask(mask_of(vars) | g) - entropy_of_mask(g));
}

double EntropyCache::mutual_information(const VarSet& a, const VarSet& b, const VarSet& c) {
    const auto ma = mask_of(a), mb = mask_of(b), mc = mask_of(c);
    if ((ma & mb) || (ma & mc) || (mb & mc))
        throw std::invalid_argument("mutual_information: overlapping variable sets");
    const double v = entropy_of_mask(ma | mc) + entropy_of_mask(mb | mc) - entropy_of_mask(ma | mb | mc) -
                     entropy_of_mask(mc);
    return clamp_info(v);
}

}  // namespace jscc
