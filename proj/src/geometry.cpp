#include "ncdoa/geometry.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ncdoa/errors.hpp"

namespace ncdoa {

ArrayGeometry::ArrayGeometry(std::vector<int> positions) : positions_(std::move(positions)) {
    if (positions_.empty()) {
        throw std::invalid_argument("ArrayGeometry: at least one sensor is required");
    }
    if (positions_.front() < 0) {
        throw std::invalid_argument("ArrayGeometry: positions must be non-negative");
    }
    for (std::size_t i = 1; i < positions_.size(); ++i) {
        if (positions_[i] <= positions_[i - 1]) {
            throw std::invalid_argument("ArrayGeometry: positions must be strictly increasing");
        }
    }
}

int ArrayGeometry::aperture() const noexcept {
    return positions_.empty() ? 0 : positions_.back() - positions_.front();
}

bool ArrayGeometry::contains(int position) const noexcept {
    return std::binary_search(positions_.begin(), positions_.end(), position);
}

ArrayGeometry ArrayGeometry::translated(int offset) const {
    std::vector<int> moved(positions_);
    for (int& p : moved) p += offset;
    return ArrayGeometry(std::move(moved));
}

std::string ArrayGeometry::to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        if (i) os << ',';
        os << positions_[i];
    }
    os << '}';
    return os.str();
}

const char* to_string(PartitionKind kind) noexcept {
    return kind == PartitionKind::TypeI ? "type1" : "type2";
}

SubarrayPartition::SubarrayPartition(std::vector<ArrayGeometry> subarrays, PartitionKind kind)
    : subarrays_(std::move(subarrays)), kind_(kind) {
    if (subarrays_.empty()) {
        throw std::invalid_argument("SubarrayPartition: at least one subarray is required");
    }
    for (const auto& s : subarrays_) {
        if (s.empty()) throw std::invalid_argument("SubarrayPartition: empty subarray");
    }
    std::vector<int> all = stacked_positions();
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
        throw std::invalid_argument("SubarrayPartition: subarrays must be pairwise disjoint");
    }
    if (kind_ == PartitionKind::TypeI) {
        for (std::size_t l = 1; l < subarrays_.size(); ++l) {
            if (subarrays_[l].front() <= subarrays_[l - 1].back()) {
                throw std::invalid_argument(
                    "SubarrayPartition: Type-I subarrays must be ordered along the line");
            }
        }
    }
}

std::size_t SubarrayPartition::total_sensors() const noexcept {
    std::size_t n = 0;
    for (const auto& s : subarrays_) n += s.size();
    return n;
}

std::vector<std::size_t> SubarrayPartition::sizes() const {
    std::vector<std::size_t> out;
    out.reserve(subarrays_.size());
    for (const auto& s : subarrays_) out.push_back(s.size());
    return out;
}

std::size_t SubarrayPartition::offset(std::size_t l) const {
    std::size_t off = 0;
    for (std::size_t i = 0; i < l; ++i) off += subarrays_.at(i).size();
    return off;
}

std::vector<int> SubarrayPartition::stacked_positions() const {
    std::vector<int> out;
    for (const auto& s : subarrays_) {
        out.insert(out.end(), s.positions().begin(), s.positions().end());
    }
    return out;
}

ArrayGeometry SubarrayPartition::union_geometry() const {
    std::vector<int> all = stacked_positions();
    std::sort(all.begin(), all.end());
    return ArrayGeometry(std::move(all));
}

WeightFunction::WeightFunction(int max_lag, std::vector<long> counts)
    : max_lag_(max_lag), counts_(std::move(counts)) {
    if (max_lag_ < 0 || counts_.size() != static_cast<std::size_t>(2 * max_lag_ + 1)) {
        throw std::invalid_argument("WeightFunction: counts must cover [-max_lag, max_lag]");
    }
}

long WeightFunction::at(int lag) const noexcept {
    if (lag < -max_lag_ || lag > max_lag_) return 0;
    return counts_[static_cast<std::size_t>(lag + max_lag_)];
}

long WeightFunction::total() const noexcept {
    return std::accumulate(counts_.begin(), counts_.end(), 0L);
}

int WeightFunction::support_size() const noexcept {
    return static_cast<int>(std::count_if(counts_.begin(), counts_.end(), [](long c) { return c != 0; }));
}

bool WeightFunction::hole_free() const noexcept {
    return std::all_of(counts_.begin(), counts_.end(), [](long c) { return c != 0; });
}

WeightFunction WeightFunction::shifted(int lag, int new_max_lag) const {
    std::vector<long> out(static_cast<std::size_t>(2 * new_max_lag + 1), 0);
    for (int n = -max_lag_; n <= max_lag_; ++n) {
        const int target = n + lag;
        if (target < -new_max_lag || target > new_max_lag) {
            if (at(n) != 0) throw std::out_of_range("WeightFunction::shifted: range too small");
            continue;
        }
        out[static_cast<std::size_t>(target + new_max_lag)] = at(n);
    }
    return WeightFunction(new_max_lag, std::move(out));
}

WeightFunction& WeightFunction::operator+=(const WeightFunction& other) {
    if (other.max_lag_ > max_lag_) *this = shifted(0, other.max_lag_);
    for (int n = -other.max_lag_; n <= other.max_lag_; ++n) {
        counts_[static_cast<std::size_t>(n + max_lag_)] += other.at(n);
    }
    return *this;
}

ArrayGeometry make_ula(int n) {
    if (n < 1) throw std::invalid_argument("make_ula: n must be >= 1");
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    return ArrayGeometry(std::move(p));
}

ArrayGeometry make_nested(int n1, int n2) {
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("make_nested: n1 and n2 must be >= 1");
    std::vector<int> p;
    p.reserve(static_cast<std::size_t>(n1 + n2));
    for (int i = 0; i < n1; ++i) p.push_back(i);
    for (int k = 1; k <= n2; ++k) p.push_back(k * (n1 + 1) - 1);
    return ArrayGeometry(std::move(p));
}

namespace {

// Restricted MRAs of maximal aperture. Entries 10..12 follow the Wichmann
// construction with r = 1.
const std::array<std::vector<int>, kMaxMraSensors>& mra_table() {
    static const std::array<std::vector<int>, kMaxMraSensors> table{{
        {0},
        {0, 1},
        {0, 1, 3},
        {0, 1, 4, 6},
        {0, 1, 4, 7, 9},
        {0, 1, 6, 9, 11, 13},
        {0, 1, 8, 11, 13, 15, 17},
        {0, 1, 4, 10, 16, 18, 21, 23},
        {0, 1, 2, 14, 18, 21, 24, 27, 29},
        {0, 1, 3, 6, 13, 20, 27, 31, 35, 36},
        {0, 1, 3, 6, 13, 20, 27, 34, 38, 42, 43},
        {0, 1, 3, 6, 13, 20, 27, 34, 41, 45, 49, 50},
    }};
    return table;
}

} // namespace

ArrayGeometry make_mra(int n) {
    if (n < 1 || n > kMaxMraSensors) {
        throw UnsupportedSize("make_mra: no restricted MRA tabulated for n = " + std::to_string(n) +
                              " (supported 1.." + std::to_string(kMaxMraSensors) + ")");
    }
    return ArrayGeometry(mra_table()[static_cast<std::size_t>(n - 1)]);
}

SubarrayPartition type1_split(const ArrayGeometry& array, std::span<const int> sizes) {
    if (sizes.empty()) throw std::invalid_argument("type1_split: sizes must not be empty");
    long total = 0;
    for (int s : sizes) {
        if (s < 1) throw std::invalid_argument("type1_split: sizes must be positive");
        total += s;
    }
    if (total != static_cast<long>(array.size())) {
        throw std::invalid_argument("type1_split: sizes must sum to the number of sensors");
    }
    std::vector<ArrayGeometry> parts;
    auto it = array.positions().begin();
    for (int s : sizes) {
        parts.emplace_back(std::vector<int>(it, it + s));
        it += s;
    }
    return SubarrayPartition(std::move(parts), PartitionKind::TypeI);
}

SubarrayPartition type2_build(const ArrayGeometry& reference, int l, int mu) {
    if (!reference.normalized()) {
        throw std::invalid_argument("type2_build: reference subarray must start at 0");
    }
    if (l < 1) throw std::invalid_argument("type2_build: l must be >= 1");
    if (mu < 1) throw std::invalid_argument("type2_build: mu must be >= 1");
    std::vector<ArrayGeometry> parts;
    parts.reserve(static_cast<std::size_t>(l));
    parts.push_back(reference);
    for (int i = 1; i < l; ++i) {
        const ArrayGeometry& prev = parts.back();
        parts.push_back(prev.translated(mu + prev.aperture()));
    }
    return SubarrayPartition(std::move(parts), PartitionKind::TypeII);
}

WeightFunction weight_function(std::span<const int> positions) {
    if (positions.empty()) return WeightFunction(0, {0});
    const auto [lo, hi] = std::minmax_element(positions.begin(), positions.end());
    const int max_lag = *hi - *lo;
    std::vector<long> counts(static_cast<std::size_t>(2 * max_lag + 1), 0);
    for (int p : positions) {
        for (int q : positions) {
            ++counts[static_cast<std::size_t>(p - q + max_lag)];
        }
    }
    return WeightFunction(max_lag, std::move(counts));
}

WeightFunction weight_function(const ArrayGeometry& array) {
    return weight_function(std::span<const int>(array.positions()));
}

int dof(const ArrayGeometry& array) { return weight_function(array).support_size(); }

BoundResult dof_bound_type2(int sdof, int l, int mu) {
    if (sdof < 1 || sdof % 2 == 0) throw std::invalid_argument("dof_bound_type2: sdof must be odd and positive");
    if (l < 1) throw std::invalid_argument("dof_bound_type2: l must be >= 1");
    if (mu < 1) throw std::invalid_argument("dof_bound_type2: mu must be >= 1");
    const long kappa = (sdof - 1) / 2;
    if (mu > kappa) return {BoundKind::Exact, static_cast<long>(2 * l - 1) * sdof};
    return {BoundKind::UpperBound, static_cast<long>(l) * (sdof - 1) + 2L * (l - 1) * mu + 1};
}

Theorem1Report verify_theorem1(const ArrayGeometry& reference, int l, int mu) {
    const SubarrayPartition partition = type2_build(reference, l, mu);
    const ArrayGeometry full = partition.union_geometry();

    Theorem1Report report;
    const WeightFunction w1 = weight_function(reference);
    const WeightFunction w = weight_function(full);
    report.subarray_dof = w1.support_size();
    report.subarray_aperture = reference.aperture();
    report.subarray_hole_free = w1.hole_free();
    report.bruteforce_dof = w.support_size();

    // w(n) = sum_{i,j} w1(n - D_i + D_j) with D_i = (i-1) * Delta.
    const int delta = mu + reference.aperture();
    WeightFunction sum(w.max_lag(), std::vector<long>(w.counts().size(), 0));
    for (int i = 0; i < l; ++i) {
        for (int j = 0; j < l; ++j) {
            sum += w1.shifted((i - j) * delta, w.max_lag());
        }
    }
    report.shift_identity_holds = (sum == w);

    const int kappa = reference.aperture();
    if (report.subarray_hole_free) {
        report.bound = dof_bound_type2(report.subarray_dof, l, mu);
    } else if (mu > kappa) {
        report.bound = {BoundKind::Exact, static_cast<long>(2 * l - 1) * report.subarray_dof};
    } else {
        // Holey subarray: the sDoF parametrization of the aperture does not
        // apply, fall back to the extent of the coarray support.
        report.bound = {BoundKind::UpperBound, 2L * ((l - 1) * delta + kappa) + 1};
    }

    const long bf = report.bruteforce_dof;
    const bool bound_ok = (report.bound.kind == BoundKind::Exact || report.subarray_hole_free)
                              ? bf == report.bound.value
                              : bf <= report.bound.value;
    report.satisfied = bound_ok && report.shift_identity_holds;
    return report;
}

} // namespace ncdoa
