#include "pftrunc/data_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "pftrunc/errors.hpp"

namespace pftrunc {

std::string_view to_string(Task task) { return task == Task::classification ? "classification" : "regression"; }

const std::vector<DatasetInfo>& benchmark_datasets() {
    static const std::vector<DatasetInfo> table{
        {"CPU-act", Task::classification, 8192, 21},   {"2dPlane", Task::classification, 40768, 10},
        {"Houses", Task::classification, 20640, 8},    {"Rainfall", Task::regression, 16755, 3},
        {"Bank32nh", Task::regression, 8192, 32},      {"Houses-8L", Task::regression, 22784, 8},
    };
    return table;
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view token, double& out) {
    if (token.empty()) return false;
    const std::string buf(token);
    char* end = nullptr;
    errno = 0;
    out = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size() && errno != ERANGE && std::isfinite(out);
}

bool parse_index(std::string_view token, unsigned long& out) {
    if (token.empty() || token.front() < '0' || token.front() > '9') return false;
    const std::string buf(token);
    char* end = nullptr;
    errno = 0;
    out = std::strtoul(buf.c_str(), &end, 10);
    return end == buf.c_str() + buf.size() && errno != ERANGE;
}

// {0,1} and {1,2} become {-1,+1}; {-1,+1} is kept; other label sets are left alone.
void map_binary_labels(Dataset& ds) {
    std::set<double> labels;
    for (const auto& ex : ds.examples) labels.insert(ex.target);
    auto subset_of = [&](std::initializer_list<double> allowed) {
        return std::all_of(labels.begin(), labels.end(), [&](double v) {
            return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
        });
    };
    if (subset_of({-1.0, 1.0})) return;
    if (subset_of({0.0, 1.0})) {
        for (auto& ex : ds.examples) ex.target = ex.target == 0.0 ? -1.0 : 1.0;
    } else if (subset_of({1.0, 2.0})) {
        for (auto& ex : ds.examples) ex.target = ex.target == 1.0 ? -1.0 : 1.0;
    }
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cells.emplace_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.emplace_back(trim(cur));
    return cells;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& perm, std::size_t begin, std::size_t end,
               const char* suffix) {
    Dataset out;
    out.name = ds.name + suffix;
    out.task = ds.task;
    out.n_features = ds.n_features;
    out.examples.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) out.examples.push_back(ds.examples[perm[i]]);
    return out;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, Task task, std::string name) {
    Dataset ds;
    ds.name = std::move(name);
    ds.task = task;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;

        std::istringstream tokens{std::string(line)};
        std::string tok;
        tokens >> tok;
        LabeledExample ex;
        if (!parse_double(tok, ex.target)) throw ParseError(line_no, "malformed label '" + tok + "'");

        unsigned long prev = 0;
        while (tokens >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) throw ParseError(line_no, "expected idx:val, got '" + tok + "'");
            unsigned long idx = 0;
            double val = 0.0;
            if (!parse_index(std::string_view(tok).substr(0, colon), idx) || idx == 0) {
                throw ParseError(line_no, "malformed index in '" + tok + "'");
            }
            if (!parse_double(std::string_view(tok).substr(colon + 1), val)) {
                throw ParseError(line_no, "malformed value in '" + tok + "'");
            }
            if (idx <= prev) throw ParseError(line_no, "indices must be strictly ascending");
            if (idx > std::numeric_limits<std::uint32_t>::max()) throw ParseError(line_no, "index out of range");
            prev = idx;
            ex.features.index.push_back(static_cast<std::uint32_t>(idx - 1));
            ex.features.value.push_back(val);
        }
        ds.n_features = std::max<std::size_t>(ds.n_features, prev);
        ds.examples.push_back(std::move(ex));
    }
    if (task == Task::classification) map_binary_labels(ds);
    return ds;
}

void write_libsvm(std::ostream& out, const Dataset& ds) {
    char buf[64];
    for (const auto& ex : ds.examples) {
        std::snprintf(buf, sizeof buf, "%.17g", ex.target);
        out << buf;
        for (std::size_t k = 0; k < ex.features.nnz(); ++k) {
            std::snprintf(buf, sizeof buf, " %u:%.17g", ex.features.index[k] + 1, ex.features.value[k]);
            out << buf;
        }
        out << '\n';
    }
}

Dataset parse_csv(std::istream& in, std::string_view target_column, Task task, std::string name) {
    std::string raw;
    if (!std::getline(in, raw)) throw ParseError(1, "missing header row");
    const std::vector<std::string> header = split_csv_line(raw);
    const auto target_it = std::find(header.begin(), header.end(), target_column);
    if (target_it == header.end()) {
        throw ParseError(1, "target column '" + std::string(target_column) + "' not found");
    }
    const std::size_t target_idx = static_cast<std::size_t>(target_it - header.begin());

    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;
    std::size_t line_no = 1;
    while (std::getline(in, raw)) {
        ++line_no;
        if (trim(raw).empty()) continue;
        auto cells = split_csv_line(raw);
        if (cells.size() != header.size()) {
            throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                          std::to_string(cells.size()));
        }
        rows.push_back(std::move(cells));
        row_lines.push_back(line_no);
    }

    const std::size_t n_cols = header.size();
    std::vector<bool> numeric(n_cols, true);
    std::vector<std::vector<double>> values(n_cols, std::vector<double>(rows.size(), 0.0));
    for (std::size_t c = 0; c < n_cols; ++c) {
        for (std::size_t r = 0; r < rows.size() && numeric[c]; ++r) {
            if (!parse_double(rows[r][c], values[c][r])) numeric[c] = false;
        }
    }

    // Feature layout: numeric columns map to one feature, categorical columns to
    // one indicator per category in first-appearance order.
    std::vector<std::size_t> offset(n_cols, 0);
    std::vector<std::unordered_map<std::string, std::size_t>> categories(n_cols);
    std::size_t n_features = 0;
    for (std::size_t c = 0; c < n_cols; ++c) {
        if (c == target_idx) continue;
        offset[c] = n_features;
        if (numeric[c]) {
            ++n_features;
        } else {
            for (const auto& row : rows) categories[c].try_emplace(row[c], categories[c].size());
            n_features += categories[c].size();
        }
    }

    Dataset ds;
    ds.name = std::move(name);
    ds.task = task;
    ds.n_features = n_features;
    ds.examples.resize(rows.size());

    std::vector<std::string> target_classes;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto& ex = ds.examples[r];
        for (std::size_t c = 0; c < n_cols; ++c) {
            if (c == target_idx) continue;
            if (numeric[c]) {
                if (values[c][r] != 0.0) {
                    ex.features.index.push_back(static_cast<std::uint32_t>(offset[c]));
                    ex.features.value.push_back(values[c][r]);
                }
            } else {
                ex.features.index.push_back(static_cast<std::uint32_t>(offset[c] + categories[c].at(rows[r][c])));
                ex.features.value.push_back(1.0);
            }
        }
        if (numeric[target_idx]) {
            ex.target = values[target_idx][r];
        } else {
            if (task == Task::regression) throw ParseError(row_lines[r], "non-numeric regression target");
            const std::string& label = rows[r][target_idx];
            auto it = std::find(target_classes.begin(), target_classes.end(), label);
            if (it == target_classes.end()) {
                if (target_classes.size() == 2) throw ParseError(row_lines[r], "more than two target classes");
                target_classes.push_back(label);
                it = target_classes.end() - 1;
            }
            ex.target = it == target_classes.begin() ? -1.0 : 1.0;
        }
    }
    if (task == Task::classification && numeric[target_idx]) map_binary_labels(ds);
    return ds;
}

bool has_binary_labels(const Dataset& ds) {
    return std::all_of(ds.examples.begin(), ds.examples.end(),
                       [](const LabeledExample& ex) { return ex.target == 1.0 || ex.target == -1.0; });
}

std::vector<std::size_t> split_permutation(std::size_t n, std::uint64_t seed, std::uint32_t repetition) {
    std::mt19937_64 engine(splitmix64(seed ^ splitmix64(0x5EEDull + repetition)));
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::uint64_t range = i;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % range;
        std::uint64_t r = engine();
        while (r >= limit) r = engine();
        std::swap(perm[i - 1], perm[r % range]);
    }
    return perm;
}

Splits shuffle_split(const Dataset& ds, const SplitSpec& spec) {
    const std::size_t n = ds.size();
    if (n < 10) throw std::invalid_argument("shuffle_split: need at least 10 examples");
    const double total = spec.train_ratio + spec.val_ratio + spec.test_ratio;
    if (std::abs(total - 1.0) > 1e-12 || spec.train_ratio <= 0.0 || spec.val_ratio < 0.0 || spec.test_ratio < 0.0) {
        throw std::invalid_argument("shuffle_split: ratios must be non-negative and sum to 1");
    }
    // Integer parts-per-million arithmetic; 0.70 * n in floating point can land just below an integer.
    const auto floor_ratio = [n](double ratio) {
        const auto percent = static_cast<std::size_t>(std::llround(ratio * 1e6));
        return n * percent / 1000000;
    };
    const std::size_t n_train = floor_ratio(spec.train_ratio);
    const std::size_t n_val = floor_ratio(spec.val_ratio);

    const auto perm = split_permutation(n, spec.seed, spec.repetition);
    return {subset(ds, perm, 0, n_train, "/train"), subset(ds, perm, n_train, n_train + n_val, "/val"),
            subset(ds, perm, n_train + n_val, n, "/test")};
}

void TransformRecord::write(std::ostream& out) const {
    auto join = [](const std::vector<double>& v) {
        std::string s;
        char buf[40];
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", v[i]);
            s += buf;
        }
        return s;
    };
    out << "permutation_algorithm=" << permutation_algorithm << '\n'
        << "seed=" << seed << '\n'
        << "repetition=" << repetition << '\n'
        << "binarized=" << (binarized ? "median" : "no") << '\n';
    if (binarized) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", binarize_threshold);
        out << "binarize_threshold=" << buf << '\n';
    }
    out << "zero_variance_features=" << zero_variance_features << '\n'
        << "mean=" << join(mean) << '\n'
        << "stddev=" << join(stddev) << '\n';
}

double binarize_by_median(Splits& splits) {
    if (splits.train.examples.empty()) throw std::invalid_argument("binarize_by_median: empty training split");
    std::vector<double> y;
    y.reserve(splits.train.size());
    for (const auto& ex : splits.train.examples) y.push_back(ex.target);
    std::sort(y.begin(), y.end());
    const std::size_t n = y.size();
    const double median = n % 2 ? y[n / 2] : 0.5 * (y[n / 2 - 1] + y[n / 2]);
    for (Dataset* ds : {&splits.train, &splits.val, &splits.test}) {
        for (auto& ex : ds->examples) ex.target = ex.target > median ? 1.0 : -1.0;
    }
    return median;
}

TransformRecord standardize_then_unit_normalize(Splits& splits) {
    const Dataset& train = splits.train;
    if (train.examples.empty()) throw std::invalid_argument("standardize: empty training split");
    const std::size_t d = train.n_features;
    const double n = static_cast<double>(train.size());

    TransformRecord rec;
    rec.mean.assign(d, 0.0);
    rec.stddev.assign(d, 0.0);
    for (const auto& ex : train.examples) {
        for (std::size_t k = 0; k < ex.features.nnz(); ++k) rec.mean[ex.features.index[k]] += ex.features.value[k];
    }
    for (double& m : rec.mean) m /= n;

    // Sum of squared deviations; implicit zeros contribute mean^2 each.
    std::vector<double> ss(d, 0.0);
    std::vector<std::size_t> nnz(d, 0);
    for (const auto& ex : train.examples) {
        for (std::size_t k = 0; k < ex.features.nnz(); ++k) {
            const std::size_t j = ex.features.index[k];
            const double dev = ex.features.value[k] - rec.mean[j];
            ss[j] += dev * dev;
            ++nnz[j];
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        ss[j] += static_cast<double>(train.size() - nnz[j]) * rec.mean[j] * rec.mean[j];
        const double sd = std::sqrt(ss[j] / n);
        if (!(sd > 1e-12 * (1.0 + std::abs(rec.mean[j])))) {
            rec.stddev[j] = 1.0;
            ++rec.zero_variance_features;
        } else {
            rec.stddev[j] = sd;
        }
    }

    Vec dense(d);
    for (Dataset* ds : {&splits.train, &splits.val, &splits.test}) {
        for (auto& ex : ds->examples) {
            for (std::size_t j = 0; j < d; ++j) dense[j] = -rec.mean[j] / rec.stddev[j];
            for (std::size_t k = 0; k < ex.features.nnz(); ++k) {
                const std::size_t j = ex.features.index[k];
                if (j >= d) throw DimensionMismatch(d, j + 1, "standardize");
                dense[j] = (ex.features.value[k] - rec.mean[j]) / rec.stddev[j];
            }
            const double row_norm = norm(dense);
            SparseVector out;
            for (std::size_t j = 0; j < d; ++j) {
                if (dense[j] == 0.0) continue;
                out.index.push_back(static_cast<std::uint32_t>(j));
                out.value.push_back(dense[j] / row_norm);
            }
            ex.features = std::move(out);
        }
    }
    return rec;
}

}  // namespace pftrunc
