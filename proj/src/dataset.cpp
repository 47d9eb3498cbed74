#include "rcfm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace rcfm {

void Dataset::validate() const {
    const std::size_t n = size();
    if (n == 0) throw std::invalid_argument("dataset: empty dataset");
    if (dim() == 0) throw std::invalid_argument("dataset: zero feature dimension");
    if (!points.all_finite()) throw std::invalid_argument("dataset: non-finite feature value");
    if (ids.size() != n) throw std::invalid_argument("dataset: id count mismatch");
    std::unordered_set<std::string> seen;
    for (const auto& id : ids)
        if (!seen.insert(id).second) throw std::invalid_argument("dataset: duplicate id '" + id + "'");
    if (labels) {
        if (labels->size() != n) throw std::invalid_argument("dataset: label count mismatch");
        for (int l : *labels)
            if (l < 0) throw std::invalid_argument("dataset: negative label");
    }
}

void Partition::validate() const {
    if (k <= 0) throw std::invalid_argument("partition: k must be positive");
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int a : assignment) {
        if (a < 0 || a >= k) throw std::invalid_argument("partition: label out of range");
        ++counts[static_cast<std::size_t>(a)];
    }
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] == 0)
            throw std::invalid_argument("partition: empty cluster " + std::to_string(c));
}

void FuzzyPartition::validate(double tol) const {
    if (c <= 0 || static_cast<std::size_t>(c) != memberships.rows())
        throw std::invalid_argument("fuzzy partition: cluster count mismatch");
    for (std::size_t kcol = 0; kcol < memberships.cols(); ++kcol) {
        double sum = 0.0;
        for (std::size_t i = 0; i < memberships.rows(); ++i) {
            const double u = memberships(i, kcol);
            if (!std::isfinite(u) || u < 0.0 || u > 1.0)
                throw std::invalid_argument("fuzzy partition: membership outside [0,1]");
            sum += u;
        }
        if (std::abs(sum - 1.0) > tol)
            throw std::invalid_argument("fuzzy partition: column sum deviates from 1");
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, std::size_t row, std::size_t col) {
    const std::string t = trim(s);
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw std::invalid_argument("csv: non-numeric value '" + s + "' at row " + std::to_string(row) +
                                    ", column " + std::to_string(col));
    return v;
}

}  // namespace

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("csv: cannot open file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("csv: empty file '" + path + "'");
    const auto header = split_csv_line(line);
    if (header.empty()) throw std::invalid_argument("csv: empty header");

    const bool has_id = trim(header.front()) == "id";
    const bool has_label = trim(header.back()) == "label" && header.size() > (has_id ? 2u : 1u);
    const std::size_t first_feature = has_id ? 1 : 0;
    const std::size_t n_features = header.size() - first_feature - (has_label ? 1 : 0);
    if (n_features == 0) throw std::invalid_argument("csv: no feature columns");

    std::vector<std::vector<double>> rows;
    std::vector<std::string> ids;
    std::vector<int> raw_labels;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw std::invalid_argument("csv: row " + std::to_string(row_no) + " has " +
                                        std::to_string(fields.size()) + " fields, expected " +
                                        std::to_string(header.size()));
        ids.push_back(has_id ? trim(fields[0]) : std::to_string(row_no - 1));
        std::vector<double> feat(n_features);
        for (std::size_t j = 0; j < n_features; ++j)
            feat[j] = parse_double(fields[first_feature + j], row_no, first_feature + j);
        rows.push_back(std::move(feat));
        if (has_label) {
            const double lv = parse_double(fields.back(), row_no, header.size() - 1);
            if (lv < 0 || lv != std::floor(lv))
                throw std::invalid_argument("csv: label must be a non-negative integer at row " +
                                            std::to_string(row_no));
            raw_labels.push_back(static_cast<int>(lv));
        }
    }
    if (rows.empty()) throw std::invalid_argument("csv: empty dataset");

    Dataset d;
    d.points = Matrix(rows.size(), n_features);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < n_features; ++j) d.points(i, j) = rows[i][j];
    d.ids = std::move(ids);
    if (has_label) {
        // compact label values to a dense range, ordered by value
        std::map<int, int> remap;
        for (int l : raw_labels) remap.emplace(l, 0);
        int next = 0;
        for (auto& [value, dense] : remap) dense = next++;
        std::vector<int> labels(raw_labels.size());
        for (std::size_t i = 0; i < raw_labels.size(); ++i) labels[i] = remap[raw_labels[i]];
        d.labels = std::move(labels);
    }
    d.validate();
    return d;
}

void write_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("csv: cannot write file '" + path + "'");
    out << "id";
    for (std::size_t j = 0; j < data.dim(); ++j) out << ",f" << j;
    if (data.labels) out << ",label";
    out << "\n";
    char buf[64];
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << data.ids[i];
        for (std::size_t j = 0; j < data.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", data.points(i, j));
            out << ',' << buf;
        }
        if (data.labels) out << ',' << (*data.labels)[i];
        out << "\n";
    }
}

Matrix contingency(const Partition& p, const Partition& q) {
    if (p.size() != q.size()) throw std::invalid_argument("contingency: partition length mismatch");
    Matrix m(static_cast<std::size_t>(p.k), static_cast<std::size_t>(q.k), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        m(static_cast<std::size_t>(p.assignment[i]), static_cast<std::size_t>(q.assignment[i])) += 1.0;
    return m;
}

std::vector<int> solve_assignment(const Matrix& cost) {
    // Jonker-Volgenant style shortest augmenting path, O(n^3).
    const int n = static_cast<int>(cost.rows());
    if (n == 0 || cost.cols() != cost.rows())
        throw std::invalid_argument("assignment: cost matrix must be square and non-empty");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

Partition align_labels(const Partition& p, const Partition& reference) {
    if (p.size() != reference.size())
        throw std::invalid_argument("align_labels: partition length mismatch");
    if (p.k != reference.k)
        throw std::invalid_argument("align_labels: cluster count mismatch (" + std::to_string(p.k) +
                                    " vs " + std::to_string(reference.k) + ")");
    const Matrix counts = contingency(p, reference);
    // maximize the matched diagonal == minimize negated counts
    Matrix cost(counts.rows(), counts.cols());
    for (std::size_t i = 0; i < counts.rows(); ++i)
        for (std::size_t j = 0; j < counts.cols(); ++j) cost(i, j) = -counts(i, j);
    const std::vector<int> perm = solve_assignment(cost);
    Partition out;
    out.k = p.k;
    out.assignment.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        out.assignment[i] = perm[static_cast<std::size_t>(p.assignment[i])];
    return out;
}

std::size_t agreement(const Partition& p, const Partition& q) {
    if (p.size() != q.size()) throw std::invalid_argument("agreement: partition length mismatch");
    std::size_t n = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p.assignment[i] == q.assignment[i]) ++n;
    return n;
}

double clustering_accuracy(const Partition& pred, const std::vector<int>& truth) {
    if (pred.size() == 0 || truth.empty()) throw std::invalid_argument("accuracy: empty input");
    if (pred.size() != truth.size()) throw std::invalid_argument("accuracy: length mismatch");
    int n_classes = 0;
    for (int t : truth) {
        if (t < 0) throw std::invalid_argument("accuracy: negative class label");
        n_classes = std::max(n_classes, t + 1);
    }
    const std::size_t side = static_cast<std::size_t>(std::max(pred.k, n_classes));
    // pad the negated count matrix with zeros so the assignment stays square
    Matrix cost(side, side, 0.0);
    for (std::size_t i = 0; i < pred.size(); ++i)
        cost(static_cast<std::size_t>(pred.assignment[i]), static_cast<std::size_t>(truth[i])) -= 1.0;
    const std::vector<int> match = solve_assignment(cost);
    double matched = 0.0;
    for (std::size_t c = 0; c < side; ++c) matched -= cost(c, static_cast<std::size_t>(match[c]));
    return matched / static_cast<double>(pred.size());
}

Partition harden(const FuzzyPartition& fp) {
    Partition out;
    out.k = fp.c;
    out.assignment.resize(fp.size());
    for (std::size_t kcol = 0; kcol < fp.size(); ++kcol) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < fp.memberships.rows(); ++i)
            if (fp.memberships(i, kcol) > fp.memberships(best, kcol)) best = i;
        out.assignment[kcol] = static_cast<int>(best);
    }
    return out;
}

}  // namespace rcfm
