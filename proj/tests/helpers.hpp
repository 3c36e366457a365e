#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fsvd/fsvd.hpp>

namespace testutil {

// Scratch directory with a unique name, removed when the fixture dies.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        const std::string name = "fsvd-test-" + std::to_string(rd()) + "-" +
                                 std::to_string(counter.fetch_add(1));
        path_ = std::filesystem::temp_directory_path() / name;
        std::filesystem::create_directories(path_);
    }

    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str(const std::string& leaf = "") const {
        return leaf.empty() ? path_.string() : (path_ / leaf).string();
    }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

// Generic full-rank fixture data from the standard library generator —
// deliberately not the library's seeded stream, so fixtures and the code
// under test cannot share a bug.
inline fsvd::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint32_t seed) {
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    fsvd::Matrix m(rows, cols);
    for (double& v : m.data()) v = dist(engine);
    return m;
}

inline double orthonormality_error(const fsvd::Matrix& q) {
    const fsvd::Matrix gram = fsvd::multiply_at_b(q, q);
    double err = 0.0;
    for (std::size_t i = 0; i < gram.rows(); ++i)
        for (std::size_t j = 0; j < gram.cols(); ++j)
            err = std::max(err, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));
    return err;
}

// Row partition of a stacked right factor, as the federated routines see it.
inline std::vector<fsvd::Matrix> split_rows(const fsvd::Matrix& v,
                                            const std::vector<std::size_t>& sizes) {
    std::vector<fsvd::Matrix> blocks;
    std::size_t offset = 0;
    for (std::size_t size : sizes) {
        blocks.push_back(v.row_slice(offset, offset + size));
        offset += size;
    }
    return blocks;
}

// Non-increasing spectrum with a fixed relative gap between neighbors.
inline std::vector<double> geometric_spectrum(std::size_t count, double top, double ratio) {
    std::vector<double> s(count);
    double v = top;
    for (std::size_t i = 0; i < count; ++i) {
        s[i] = v;
        v *= ratio;
    }
    return s;
}

inline double max_angle(const std::vector<double>& angles) {
    double m = 0.0;
    for (double a : angles) m = std::max(m, a);
    return m;
}

}  // namespace testutil
