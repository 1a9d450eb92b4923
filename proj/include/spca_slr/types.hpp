#ifndef SPCA_SLR_TYPES_HPP
#define SPCA_SLR_TYPES_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <iterator>
#include <numeric>
#include <vector>

namespace spca_slr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexSet = std::vector<Index>;

/// sign(value) * max(|value| - level, 0).
inline double soft_threshold(double value, double level) {
    if (value > level) return value - level;
    if (value < -level) return value + level;
    return 0.0;
}

/// Indices of the `count` largest entries of `scores`, ties toward the lower
/// index, returned in ascending index order.
inline IndexSet top_k_indices(const Eigen::Ref<const Vector>& scores, Index count) {
    const Index size = scores.size();
    count = std::clamp<Index>(count, 0, size);
    IndexSet order(static_cast<std::size_t>(size));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return scores[a] > scores[b]; });
    order.resize(static_cast<std::size_t>(count));
    std::sort(order.begin(), order.end());
    return order;
}

/// Size of the intersection of two ascending index sets.
inline Index overlap_count(const IndexSet& a, const IndexSet& b) {
    IndexSet both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    return static_cast<Index>(both.size());
}

/// Copy of `x` with column `col` removed; columns after it shift down by one.
inline Matrix drop_column(const Eigen::Ref<const Matrix>& x, Index col) {
    const Index p = x.cols();
    Matrix out(x.rows(), p - 1);
    out.leftCols(col) = x.leftCols(col);
    out.rightCols(p - 1 - col) = x.rightCols(p - 1 - col);
    return out;
}

/// Same as drop_column, for a vector.
inline Vector drop_entry(const Eigen::Ref<const Vector>& v, Index pos) {
    const Index p = v.size();
    Vector out(p - 1);
    out.head(pos) = v.head(pos);
    out.tail(p - 1 - pos) = v.tail(p - 1 - pos);
    return out;
}

}  // namespace spca_slr

#endif
