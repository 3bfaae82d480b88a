#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "core.hpp"

// Dataset and image files.
namespace ffista {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Samples as rows of A with +-1 labels.
struct SparseDataset {
    SparseMatrix A;
    Vector b;
};

namespace detail {

inline double parse_label(const std::string& tok, long line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos == tok.size()) {
            if (v == 1.0) return 1.0;
            if (v == -1.0 || v == 0.0) return -1.0;
        }
    } catch (const std::logic_error&) {
    }
    throw ParseError("label must be +1, -1 or 0, got '" + tok + "'", line);
}

inline std::ifstream open_input(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return in;
}

} // namespace detail

/// Reads "label idx:val idx:val ..." lines with 1-based feature indices.
///
/// Label 0 is read as -1. The column count is the largest index seen, or
/// n_features when that is larger. Blank lines are ignored.
inline SparseDataset load_sparse_dataset(std::istream& in, Eigen::Index n_features = 0) {
    std::vector<Eigen::Triplet<double>> entries;
    std::vector<double> labels;
    Eigen::Index cols = n_features;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tok;
        if (!(ss >> tok)) continue;
        const auto row = static_cast<Eigen::Index>(labels.size());
        labels.push_back(detail::parse_label(tok, lineno));
        while (ss >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) throw ParseError("expected idx:val, got '" + tok + "'", lineno);
            long idx = 0;
            double val = 0;
            try {
                std::size_t p1 = 0, p2 = 0;
                idx = std::stol(tok.substr(0, colon), &p1);
                val = std::stod(tok.substr(colon + 1), &p2);
                if (p1 != colon || p2 != tok.size() - colon - 1) throw std::invalid_argument("trailing");
            } catch (const std::logic_error&) {
                throw ParseError("malformed entry '" + tok + "'", lineno);
            }
            if (idx < 1) throw ParseError("feature index must be >= 1, got " + std::to_string(idx), lineno);
            entries.emplace_back(row, idx - 1, val);
            cols = std::max<Eigen::Index>(cols, idx);
        }
    }
    if (labels.empty()) throw EmptyDataset("dataset has no samples");
    SparseDataset ds;
    ds.A.resize(static_cast<Eigen::Index>(labels.size()), cols);
    ds.A.setFromTriplets(entries.begin(), entries.end());
    ds.b = Eigen::Map<const Vector>(labels.data(), static_cast<Eigen::Index>(labels.size()));
    return ds;
}

inline SparseDataset load_sparse_dataset(const std::string& path, Eigen::Index n_features = 0) {
    auto in = detail::open_input(path);
    return load_sparse_dataset(in, n_features);
}

inline void write_sparse_dataset(std::ostream& out, const SparseMatrix& A, const Vector& b) {
    require_same_size(b.size(), A.rows(), "write_sparse_dataset labels");
    char buf[40];
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        out << (b[i] > 0 ? "+1" : "-1");
        for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
            std::snprintf(buf, sizeof buf, "%.17g", it.value());
            out << ' ' << it.col() + 1 << ':' << buf;
        }
        out << '\n';
    }
}

inline void write_sparse_dataset(const std::string& path, const SparseMatrix& A, const Vector& b) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    write_sparse_dataset(out, A, b);
}

namespace detail {

// Next header token of a PGM file, skipping whitespace and # comments.
inline std::string pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw ParseError("PGM: truncated header");
    return tok;
}

inline long pgm_number(std::istream& in, const char* what) {
    const std::string tok = pgm_token(in);
    try {
        std::size_t pos = 0;
        const long v = std::stol(tok, &pos);
        if (pos == tok.size() && v > 0) return v;
    } catch (const std::logic_error&) {
    }
    throw ParseError(std::string("PGM: invalid ") + what + " '" + tok + "'");
}

} // namespace detail

/// Binary P5 graymap with maxval 255, scaled to [0, 1]. Row-major rows x cols.
inline Matrix load_pgm(std::istream& in) {
    if (detail::pgm_token(in) != "P5") throw ParseError("PGM: expected magic 'P5'");
    const long cols = detail::pgm_number(in, "width");
    const long rows = detail::pgm_number(in, "height");
    const long maxval = detail::pgm_number(in, "maxval");
    if (maxval != 255) throw ParseError("PGM: only maxval 255 is supported, got " + std::to_string(maxval));
    // pgm_token consumed the single whitespace byte after maxval
    std::vector<unsigned char> buf(static_cast<std::size_t>(rows * cols));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
        throw ParseError("PGM: truncated payload (" + std::to_string(in.gcount()) + " of " +
                         std::to_string(buf.size()) + " bytes)");
    Matrix img(rows, cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) img(r, c) = buf[static_cast<std::size_t>(r * cols + c)] / 255.0;
    return img;
}

inline Matrix load_pgm(const std::string& path) {
    auto in = detail::open_input(path, std::ios::binary);
    return load_pgm(in);
}

/// Writes values clamped to [0, 1] and rounded to the nearest of 256 levels.
inline void write_pgm(std::ostream& out, const Matrix& img) {
    out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
    for (Eigen::Index r = 0; r < img.rows(); ++r)
        for (Eigen::Index c = 0; c < img.cols(); ++c) {
            const double v = std::clamp(img(r, c), 0.0, 1.0);
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
        }
}

inline void write_pgm(const std::string& path, const Matrix& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    write_pgm(out, img);
}

} // namespace ffista
