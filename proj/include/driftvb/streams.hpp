#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftvb/csv.hpp"
#include "driftvb/rng.hpp"

namespace driftvb {

using Observation = std::vector<double>;

/// One time slice of the stream with its held-out third.  test is empty
/// when the stream was generated without a holdout split.
struct Batch {
    int t = 0;
    std::vector<Observation> train;
    std::vector<Observation> test;
};

/// Piecewise-stationary generator schedule: each segment holds its
/// generating parameters for num_steps batches.
struct DriftSchedule {
    struct Segment {
        int num_steps = 1;
        std::vector<double> params;
    };
    std::vector<Segment> segments;
    int batch_size = 100;
    std::uint64_t seed = 0;
    /// When set, each batch is split ~2/3 train, 1/3 test by a seeded
    /// per-row draw; otherwise the whole batch is training data.
    bool holdout = false;
};

namespace detail {

inline void validate_schedule(const DriftSchedule& sched) {
    if (sched.segments.empty()) throw std::invalid_argument("schedule has no segments");
    if (sched.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    for (const auto& seg : sched.segments) {
        if (seg.num_steps < 1) throw std::invalid_argument("segment num_steps must be >= 1");
    }
}

// Row goes to test iff its seeded draw falls below 1/3.
inline bool row_is_test(std::uint64_t seed, std::uint64_t t, std::uint64_t row) {
    return uniform01(seed ^ 0x5e17u, t, row) < 1.0 / 3.0;
}

}  // namespace detail

/// Bernoulli batches at the active segment's success probability p.
inline std::vector<Batch> generate_binomial_stream(const DriftSchedule& sched) {
    detail::validate_schedule(sched);
    for (const auto& seg : sched.segments) {
        if (seg.params.size() != 1 || !(seg.params[0] > 0.0) || !(seg.params[0] < 1.0)) {
            throw std::invalid_argument("binomial segment needs a single p in (0,1)");
        }
    }
    std::vector<Batch> out;
    int t = 0;
    for (const auto& seg : sched.segments) {
        for (int s = 0; s < seg.num_steps; ++s, ++t) {
            Batch batch;
            batch.t = t;
            for (int i = 0; i < sched.batch_size; ++i) {
                const double y = uniform01(sched.seed, t, i) < seg.params[0] ? 1.0 : 0.0;
                if (sched.holdout && detail::row_is_test(sched.seed, t, i)) {
                    batch.test.push_back({y});
                } else {
                    batch.train.push_back({y});
                }
            }
            out.push_back(std::move(batch));
        }
    }
    return out;
}

/// Gaussian batches; segment params are flattened per-component
/// (mean, stddev) pairs, components drawn uniformly, so a single pair
/// gives a plain Gaussian stream and k pairs a k-component mixture.
inline std::vector<Batch> generate_gaussian_stream(const DriftSchedule& sched) {
    detail::validate_schedule(sched);
    for (const auto& seg : sched.segments) {
        if (seg.params.empty() || seg.params.size() % 2 != 0) {
            throw std::invalid_argument("gaussian segment needs (mean, stddev) pairs");
        }
        for (size_t c = 0; c + 1 < seg.params.size(); c += 2) {
            if (!(seg.params[c + 1] > 0.0)) {
                throw std::invalid_argument("gaussian segment stddev must be positive");
            }
        }
    }
    std::vector<Batch> out;
    int t = 0;
    for (const auto& seg : sched.segments) {
        const int k = static_cast<int>(seg.params.size() / 2);
        for (int s = 0; s < seg.num_steps; ++s, ++t) {
            Batch batch;
            batch.t = t;
            for (int i = 0; i < sched.batch_size; ++i) {
                int c = 0;
                if (k > 1) {
                    c = std::min<int>(k - 1, static_cast<int>(
                                                 uniform01(sched.seed ^ 0xc0c0ul, t, i) * k));
                }
                const double x =
                    seg.params[2 * c] + seg.params[2 * c + 1] * normal01(sched.seed, t, i);
                if (sched.holdout && detail::row_is_test(sched.seed, t, i)) {
                    batch.test.push_back({x});
                } else {
                    batch.train.push_back({x});
                }
            }
            out.push_back(std::move(batch));
        }
    }
    return out;
}

/// Batches from a CSV file: header row required, rows grouped by the
/// named batch column (ascending key order), remaining columns become
/// the observation vector.  A "split" column with train/test labels is
/// honored when present; otherwise rows are split 2/3-1/3 by seeded
/// draw.  Parse errors name the offending row.
inline std::vector<Batch> load_csv_stream(const std::string& path,
                                          const std::string& batch_column,
                                          std::uint64_t split_seed) {
    const CsvTable table = read_csv(path);
    const int key_col = table.column(batch_column);
    if (key_col < 0) {
        throw std::runtime_error(path + ": missing batch column '" + batch_column + "'");
    }
    const int split_col = table.column("split");

    std::vector<int> value_cols;
    for (int c = 0; c < static_cast<int>(table.header.size()); ++c) {
        if (c != key_col && c != split_col) value_cols.push_back(c);
    }
    if (value_cols.empty()) throw std::runtime_error(path + ": no value columns");

    // Keys sort numerically; time order is key order.
    std::map<double, Batch> grouped;
    std::map<double, std::uint64_t> row_counter;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string context = path + " row " + std::to_string(r + 1);
        const double key = parse_double(row[key_col], context);
        Observation obs(value_cols.size());
        for (size_t j = 0; j < value_cols.size(); ++j) {
            obs[j] = parse_double(row[value_cols[j]], context);
        }
        bool is_test;
        if (split_col >= 0) {
            const std::string& s = row[split_col];
            if (s != "train" && s != "test") {
                throw std::runtime_error(context + ": split must be 'train' or 'test', got '" +
                                         s + "'");
            }
            is_test = (s == "test");
        } else {
            is_test = detail::row_is_test(split_seed, static_cast<std::uint64_t>(key),
                                          row_counter[key]++);
        }
        auto& batch = grouped[key];
        (is_test ? batch.test : batch.train).push_back(std::move(obs));
    }

    std::vector<Batch> out;
    int t = 0;
    for (auto& [key, batch] : grouped) {
        batch.t = t++;
        out.push_back(std::move(batch));
    }
    return out;
}

}  // namespace driftvb
