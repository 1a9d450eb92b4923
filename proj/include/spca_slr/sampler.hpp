#ifndef SPCA_SLR_SAMPLER_HPP
#define SPCA_SLR_SAMPLER_HPP

// Sample generation and second-moment utilities.
//
// NOTE: the population mean is known to be zero throughout. Nothing here
// centers the data; real data would have to be centered by the caller.

#include "spca_slr/errors.hpp"
#include "spca_slr/model.hpp"
#include "spca_slr/rng.hpp"
#include "spca_slr/types.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace spca_slr {

/// n x d data matrix, one sample per row.
struct SampleMatrix {
    Matrix data;

    Index n() const { return data.rows(); }
    Index d() const { return data.cols(); }

    void validate() const {
        detail::require(n() >= 1, "sample matrix: need n >= 1");
        detail::require(d() >= 2, "sample matrix: need d >= 2");
        detail::require(data.allFinite(), "sample matrix: non-finite entry");
    }
};

/// Rows x = g + sqrt(theta) * xi * u with g ~ N(0, I_d), xi ~ N(0, 1).
/// Per row the draws are g_0..g_{d-1} followed by xi.
inline SampleMatrix sample_spiked(const SpikedModel& model, Index n, Seed seed) {
    detail::require(n >= 1, "sample_spiked: need n >= 1");
    model.validate();
    const Index d = model.d;
    const double scale = std::sqrt(model.theta);
    Rng rng(seed);
    Matrix data(n, d);
    for (Index r = 0; r < n; ++r) {
        for (Index c = 0; c < d; ++c) {
            data(r, c) = rng.normal();
        }
        const double xi = rng.normal();
        if (scale != 0.0) {
            for (Index s : model.spike.support) {
                data(r, s) += scale * xi * model.spike.u[s];
            }
        }
    }
    return SampleMatrix{std::move(data)};
}

/// Isotropic null N(0, I_d); same stream layout as sample_spiked with theta = 0.
inline SampleMatrix sample_null(Index d, Index n, Seed seed) {
    detail::require(d >= 1, "sample_null: need d >= 1");
    SpikedModel null_model{d, 1, 0.0, make_spike(d, 1, SpikeMode::uniform)};
    return sample_spiked(null_model, n, seed);
}

/// (1/n) X^T X, symmetrized.
inline Matrix empirical_covariance(const SampleMatrix& x) {
    detail::require(x.n() >= 1, "empirical_covariance: need n >= 1");
    Matrix cov = Matrix::Zero(x.d(), x.d());
    cov.selfadjointView<Eigen::Lower>().rankUpdate(x.data.transpose(), 1.0 / static_cast<double>(x.n()));
    cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
    return cov;
}

/// Mean-zero second moment of every column, (1/n) sum_t x_ti^2.
inline Vector column_second_moments(const SampleMatrix& x) {
    return x.data.colwise().squaredNorm().transpose() / static_cast<double>(x.n());
}

/// Multiplies column i by scales[i].
inline SampleMatrix rescale_columns(const SampleMatrix& x, const Vector& scales) {
    detail::require(scales.size() == x.d(), "rescale_columns: scale vector length must equal d");
    for (Index i = 0; i < scales.size(); ++i) {
        detail::require(std::isfinite(scales[i]) && scales[i] > 0.0, "rescale_columns: scales must be positive");
    }
    return SampleMatrix{x.data * scales.asDiagonal()};
}

/// Rescales every column to unit mean-zero sample variance.
inline SampleMatrix rescale_unit_variance(const SampleMatrix& x) {
    const Vector moments = column_second_moments(x);
    for (Index i = 0; i < moments.size(); ++i) {
        if (!(moments[i] > 0.0)) {
            throw DegenerateInputError("rescale_unit_variance: column " + std::to_string(i) + " has zero variance");
        }
    }
    return SampleMatrix{x.data * moments.cwiseSqrt().cwiseInverse().asDiagonal()};
}

// CSV matrix dump: row-major, one sample per line, '.' decimal, no header.

inline void write_matrix_csv(std::ostream& out, const Matrix& m) {
    char buffer[32];
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buffer, sizeof buffer, "%.17g", m(r, c));
            if (c > 0) out << ',';
            out << buffer;
        }
        out << '\n';
    }
}

inline void write_matrix_csv(const std::string& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_matrix_csv(out, m);
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline Matrix read_matrix_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream fields(line);
        fields.imbue(std::locale::classic());
        std::string field;
        while (std::getline(fields, field, ',')) {
            std::istringstream cell(field);
            cell.imbue(std::locale::classic());
            double value;
            if (!(cell >> value)) throw ParameterError("read_matrix_csv: bad number '" + field + "'");
            row.push_back(value);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ParameterError("read_matrix_csv: ragged rows");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParameterError("read_matrix_csv: no data");
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        }
    }
    return m;
}

inline Matrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_matrix_csv(in);
}

}  // namespace spca_slr

#endif
