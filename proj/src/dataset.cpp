#include "hybreg/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "hybreg/errors.hpp"
#include "hybreg/rng.hpp"

namespace hybreg {

std::vector<std::string> default_schema() {
    return {"s1_temp", "s2_temp", "flow_rate", "solar_radiation", "s4_temp"};
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string format_value(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

Eigen::MatrixXd read_csv_columns(const std::string& path,
                                 const std::vector<std::string>& columns,
                                 RowPolicy policy,
                                 std::size_t* dropped_out) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);

    const std::vector<std::string> header = split_line(line);
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < header.size(); ++i) position.emplace(header[i], i);

    std::vector<std::size_t> wanted;
    for (const auto& name : columns) {
        auto it = position.find(name);
        if (it == position.end()) throw DataError("missing column '" + name + "' in " + path);
        wanted.push_back(it->second);
    }

    std::vector<std::vector<double>> rows;
    std::size_t dropped = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        std::vector<double> row(wanted.size());
        bool ok = cells.size() >= header.size();
        std::size_t bad_col = 0;
        if (ok) {
            for (std::size_t j = 0; j < wanted.size(); ++j) {
                if (!parse_double(cells[wanted[j]], row[j])) {
                    ok = false;
                    bad_col = j;
                    break;
                }
            }
        }
        if (ok) {
            rows.push_back(std::move(row));
        } else if (policy == RowPolicy::Drop) {
            ++dropped;
        } else {
            throw DataError("parse failure at " + path + ": line " + std::to_string(line_no) +
                            ", column '" + columns[bad_col] + "'");
        }
    }
    if (dropped_out) *dropped_out = dropped;
    if (rows.empty()) throw DataError("empty dataset: " + path);

    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(columns.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < columns.size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

Dataset ingest_csv(const std::string& path, const std::vector<std::string>& schema,
                   RowPolicy policy, std::size_t* dropped_out) {
    if (schema.size() < 2) throw std::invalid_argument("schema needs features plus target");
    const Eigen::MatrixXd table = read_csv_columns(path, schema, policy, dropped_out);
    Dataset d;
    d.features = table.leftCols(table.cols() - 1);
    d.target = table.col(table.cols() - 1);
    d.column_names = schema;
    return d;
}

std::string to_csv(const Dataset& data) {
    std::string out;
    for (std::size_t j = 0; j < data.column_names.size(); ++j) {
        if (j) out += ',';
        out += data.column_names[j];
    }
    out += '\n';
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < data.feature_count(); ++j) {
            if (j) out += ',';
            out += format_value(data.features(i, j));
        }
        out += ',';
        out += format_value(data.target(i));
        out += '\n';
    }
    return out;
}

ScalerParams fit_scaler(const Eigen::MatrixXd& train_features) {
    if (train_features.rows() < 1) throw std::invalid_argument("fit_scaler: empty data");
    ScalerParams p;
    p.mins = train_features.colwise().minCoeff();
    p.maxs = train_features.colwise().maxCoeff();
    p.degenerate.resize(static_cast<std::size_t>(train_features.cols()));
    for (Eigen::Index j = 0; j < train_features.cols(); ++j)
        p.degenerate[static_cast<std::size_t>(j)] = (p.maxs(j) == p.mins(j));
    return p;
}

ScalerParams fit_scaler(const Dataset& train) { return fit_scaler(train.features); }

Eigen::MatrixXd apply_scaler(const ScalerParams& params, const Eigen::MatrixXd& features) {
    if (features.cols() != params.size())
        throw std::invalid_argument("apply_scaler: column count mismatch");
    Eigen::MatrixXd out(features.rows(), features.cols());
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        // zero-range columns map to 0.0 so the transform stays total
        if (params.degenerate[static_cast<std::size_t>(j)]) {
            out.col(j).setZero();
        } else {
            out.col(j) = (features.col(j).array() - params.mins(j)) /
                         (params.maxs(j) - params.mins(j));
        }
    }
    return out;
}

Dataset apply_scaler(const ScalerParams& params, const Dataset& data) {
    Dataset out = data;
    out.features = apply_scaler(params, data.features);
    return out;
}

Eigen::VectorXd apply_scaler_row(const ScalerParams& params, const Eigen::VectorXd& row) {
    Eigen::MatrixXd m = apply_scaler(params, Eigen::MatrixXd(row.transpose()));
    return m.row(0);
}

Eigen::MatrixXd invert_scaler(const ScalerParams& params, const Eigen::MatrixXd& scaled) {
    if (scaled.cols() != params.size())
        throw std::invalid_argument("invert_scaler: column count mismatch");
    Eigen::MatrixXd out(scaled.rows(), scaled.cols());
    for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
        if (params.degenerate[static_cast<std::size_t>(j)]) {
            out.col(j).setConstant(params.mins(j));
        } else {
            out.col(j) = scaled.col(j).array() * (params.maxs(j) - params.mins(j)) +
                         params.mins(j);
        }
    }
    return out;
}

SplitResult split(const Dataset& data, const SplitSpec& spec) {
    const Eigen::Index n = data.size();
    if (!(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0))
        throw std::invalid_argument("validation fraction must lie in (0,1)");
    const auto n_val =
        static_cast<Eigen::Index>(std::llround(static_cast<double>(n) * spec.validation_fraction));
    if (n_val < 1 || n_val >= n)
        throw std::invalid_argument("validation fraction leaves an empty partition");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(spec.seed);
    rng.shuffle(order);

    auto take = [&](Eigen::Index begin, Eigen::Index count) {
        Dataset part;
        part.features.resize(count, data.feature_count());
        part.target.resize(count);
        part.column_names = data.column_names;
        for (Eigen::Index i = 0; i < count; ++i) {
            const Eigen::Index src = order[static_cast<std::size_t>(begin + i)];
            part.features.row(i) = data.features.row(src);
            part.target(i) = data.target(src);
        }
        return part;
    };

    SplitResult result;
    result.train = take(0, n - n_val);
    result.validation = take(n - n_val, n_val);
    return result;
}

namespace {

struct Regime {
    double s1_mean, s2_mean, flow_mean, rad_mean;
    // target map coefficients: s4 = a*s1 + b*s2 + c*rad + d*flow + e + f*sin(g*driver)
    double a, b, c, d, e, f, g;
    bool driver_is_s1;
};

// Input levels sit ≥ 5 within-regime standard deviations apart per column,
// and each regime maps inputs to the target differently.
const Regime kRegimes[4] = {
    {22.0, 20.0, 120.0, 150.0, 0.55, 0.30, 0.012, -0.008, 4.0, 1.5, 0.25, true},
    {38.0, 35.0, 280.0, 420.0, -0.35, 0.85, 0.020, 0.010, -6.0, 1.2, 0.20, false},
    {54.0, 50.0, 440.0, 700.0, 0.80, -0.25, -0.010, 0.018, 12.0, 1.0, 0.15, true},
    {70.0, 65.0, 600.0, 980.0, 0.18, 0.22, 0.016, -0.012, 2.0, 1.4, 0.30, false},
};

constexpr double kTempSd = 1.2;
constexpr double kFlowSd = 8.0;
constexpr double kRadSd = 18.0;
constexpr double kNoiseSd = 0.35;

}  // namespace

SynthResult synthesize(std::size_t n, std::uint64_t seed) {
    if (n < 10) throw std::invalid_argument("synthesize: n must be at least 10");

    SynthResult out;
    out.data.features.resize(static_cast<Eigen::Index>(n), 4);
    out.data.target.resize(static_cast<Eigen::Index>(n));
    out.data.column_names = default_schema();
    out.regimes.resize(n);

    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const int r = static_cast<int>(rng.index(4));
        const Regime& reg = kRegimes[r];
        const double s1 = rng.normal(reg.s1_mean, kTempSd);
        const double s2 = rng.normal(reg.s2_mean, kTempSd);
        const double flow = rng.normal(reg.flow_mean, kFlowSd);
        const double rad = rng.normal(reg.rad_mean, kRadSd);
        const double driver = reg.driver_is_s1 ? s1 : s2;
        const double s4 = reg.a * s1 + reg.b * s2 + reg.c * rad + reg.d * flow + reg.e +
                          reg.f * std::sin(reg.g * driver) + rng.normal(0.0, kNoiseSd);
        const auto row = static_cast<Eigen::Index>(i);
        out.data.features(row, 0) = s1;
        out.data.features(row, 1) = s2;
        out.data.features(row, 2) = flow;
        out.data.features(row, 3) = rad;
        out.data.target(row) = s4;
        out.regimes[i] = r;
    }
    return out;
}

}  // namespace hybreg
