#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ncdoa {

/// Sensor positions of a linear array on the integer lattice (units of the
/// minimum spacing d). Positions are strictly increasing and non-negative.
class ArrayGeometry {
public:
    ArrayGeometry() = default;
    explicit ArrayGeometry(std::vector<int> positions);

    const std::vector<int>& positions() const noexcept { return positions_; }
    std::size_t size() const noexcept { return positions_.size(); }
    bool empty() const noexcept { return positions_.empty(); }

    int front() const { return positions_.front(); }
    int back() const { return positions_.back(); }

    /// max - min; 0 for a single sensor.
    int aperture() const noexcept;

    bool normalized() const noexcept { return !positions_.empty() && positions_.front() == 0; }
    bool contains(int position) const noexcept;

    ArrayGeometry translated(int offset) const;

    std::string to_string() const;

    friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;

private:
    std::vector<int> positions_;
};

enum class PartitionKind { TypeI, TypeII };

const char* to_string(PartitionKind kind) noexcept;

/// Ordered, pairwise-disjoint subarrays whose union is the full array.
/// Observation vectors are stacked in subarray order.
class SubarrayPartition {
public:
    SubarrayPartition(std::vector<ArrayGeometry> subarrays, PartitionKind kind);

    const std::vector<ArrayGeometry>& subarrays() const noexcept { return subarrays_; }
    const ArrayGeometry& subarray(std::size_t l) const { return subarrays_.at(l); }
    PartitionKind kind() const noexcept { return kind_; }

    std::size_t count() const noexcept { return subarrays_.size(); }
    std::size_t total_sensors() const noexcept;
    std::vector<std::size_t> sizes() const;
    /// Row offset of subarray l inside the stacked observation vector.
    std::size_t offset(std::size_t l) const;

    /// The full array S as one geometry.
    ArrayGeometry union_geometry() const;

    /// Positions in stacking order (subarray 1 first).
    std::vector<int> stacked_positions() const;

private:
    std::vector<ArrayGeometry> subarrays_;
    PartitionKind kind_;
};

/// Weight function w(n): number of sensor pairs (p, q) with p - q = n.
/// Stored densely over lags [-max_lag, max_lag].
class WeightFunction {
public:
    WeightFunction() = default;
    WeightFunction(int max_lag, std::vector<long> counts);

    int max_lag() const noexcept { return max_lag_; }
    /// Zero outside the stored range.
    long at(int lag) const noexcept;
    const std::vector<long>& counts() const noexcept { return counts_; }

    long total() const noexcept;
    /// Number of lags with nonzero weight.
    int support_size() const noexcept;
    /// True when every lag in [-max_lag, max_lag] is present.
    bool hole_free() const noexcept;

    /// Copy of w shifted by `lag`: result(n) = w(n - lag), on a widened range.
    WeightFunction shifted(int lag, int new_max_lag) const;
    WeightFunction& operator+=(const WeightFunction& other);

    friend bool operator==(const WeightFunction&, const WeightFunction&) = default;

private:
    int max_lag_ = 0;
    std::vector<long> counts_{};
};

ArrayGeometry make_ula(int n);
/// Two-level nested array: n1 dense sensors, then n2 sensors at spacing n1 + 1.
ArrayGeometry make_nested(int n1, int n2);
/// Restricted (hole-free) minimum redundancy array from a fixed table.
ArrayGeometry make_mra(int n);
inline constexpr int kMaxMraSensors = 12;

/// Order-preserving split into consecutive chunks of the given sizes.
SubarrayPartition type1_split(const ArrayGeometry& array, std::span<const int> sizes);
/// `l` copies of `reference`, each translated from the previous by mu + aperture.
SubarrayPartition type2_build(const ArrayGeometry& reference, int l, int mu);

WeightFunction weight_function(const ArrayGeometry& array);
WeightFunction weight_function(std::span<const int> positions);
int dof(const ArrayGeometry& array);

enum class BoundKind { UpperBound, Exact };

struct BoundResult {
    BoundKind kind;
    long value;
};

/// DoF of an L-fold Type-II array built from equal subarrays of `sdof` DoF.
/// The subarray aperture is taken as (sdof - 1) / 2.
BoundResult dof_bound_type2(int sdof, int l, int mu);

struct Theorem1Report {
    int subarray_dof = 0;
    int subarray_aperture = 0;
    bool subarray_hole_free = false;
    int bruteforce_dof = 0;
    BoundResult bound{BoundKind::UpperBound, 0};
    /// Full weight function equals the sum of shifted subarray weight functions.
    bool shift_identity_holds = false;
    /// bruteforce_dof == bound when exact or hole-free, <= bound otherwise.
    bool satisfied = false;
};

Theorem1Report verify_theorem1(const ArrayGeometry& reference, int l, int mu);

} // namespace ncdoa
