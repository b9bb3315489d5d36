#include "sblr/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "sblr/errors.hpp"

namespace sblr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string entry_context(int subject, int visit) {
    std::ostringstream os;
    os << "subject " << subject << " visit " << visit;
    return os.str();
}

void check_matrix(const Matrix& w, int expected_nodes, int subject, int visit, bool symmetrize_applied) {
    const int v = w.n();
    if (v != expected_nodes) {
        std::ostringstream os;
        os << entry_context(subject, visit) << ": network is " << v << "x" << v
           << " but the dataset has V=" << expected_nodes << " nodes";
        throw DataError(os.str());
    }
    for (int r = 0; r < v; ++r) {
        if (w(r, r) != 0.0) {
            std::ostringstream os;
            os << entry_context(subject, visit) << ": nonzero diagonal entry W[" << r << "][" << r
               << "] = " << w(r, r);
            throw DataError(os.str());
        }
        for (int c = r + 1; c < v; ++c) {
            if (w(r, c) != w(c, r)) {
                std::ostringstream os;
                os << entry_context(subject, visit) << ": asymmetric entry W[" << r << "][" << c
                   << "] = " << w(r, c) << " != W[" << c << "][" << r << "] = " << w(c, r);
                if (!symmetrize_applied) os << " (load with symmetrize to average the two)";
                throw DataError(os.str());
            }
        }
        if (!std::isfinite(w(r, r))) {
            throw DataError(entry_context(subject, visit) + ": non-finite entry");
        }
    }
    for (double x : w.data()) {
        if (!std::isfinite(x)) {
            throw DataError(entry_context(subject, visit) + ": non-finite entry");
        }
    }
}

void symmetrize_in_place(Matrix& w) {
    const int v = w.n();
    for (int r = 0; r < v; ++r) {
        for (int c = r + 1; c < v; ++c) {
            const double m = 0.5 * (w(r, c) + w(c, r));
            w(r, c) = m;
            w(c, r) = m;
        }
    }
}

std::string format_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, p);
}

double parse_double(const std::string& tok, const std::string& context) {
    double out = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
        throw DataError("cannot parse number '" + tok + "' in " + context);
    }
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

Dataset load_json(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("malformed JSON in " + path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("V") || !doc.contains("subjects")) {
        throw DataError("dataset JSON must be an object with fields \"V\" and \"subjects\"");
    }
    Dataset ds;
    ds.n_nodes = doc.at("V").get<int>();
    if (ds.n_nodes < 2) throw DataError("dataset must have V >= 2 nodes");
    int si = 0;
    for (const auto& js : doc.at("subjects")) {
        LongitudinalSubject subj;
        if (!js.contains("y") || !js.contains("visits")) {
            throw DataError("subject " + std::to_string(si) + ": missing \"y\" or \"visits\"");
        }
        const auto& yv = js.at("y");
        if (!yv.is_number_integer() || (yv.get<int>() != 0 && yv.get<int>() != 1)) {
            throw DataError("subject " + std::to_string(si) + ": label must be 0 or 1");
        }
        subj.label = yv.get<int>();
        int vi = 0;
        for (const auto& jv : js.at("visits")) {
            Visit visit;
            visit.age = jv.at("age").get<double>();
            const auto& rows = jv.at("W");
            const int v = static_cast<int>(rows.size());
            visit.network = Matrix(v);
            for (int r = 0; r < v; ++r) {
                const auto& row = rows.at(r);
                if (static_cast<int>(row.size()) != v) {
                    throw DataError(entry_context(si, vi) + ": ragged matrix row " + std::to_string(r));
                }
                for (int c = 0; c < v; ++c) visit.network(r, c) = row.at(c).get<double>();
            }
            if (opts.symmetrize) symmetrize_in_place(visit.network);
            subj.visits.push_back(std::move(visit));
            ++vi;
        }
        ds.subjects.push_back(std::move(subj));
        ++si;
    }
    return ds;
}

Matrix load_matrix_csv(const std::string& path, int subject, int visit) {
    std::ifstream in(path);
    if (!in) throw DataError(entry_context(subject, visit) + ": cannot open matrix file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& tok : split_csv_line(line)) {
            row.push_back(parse_double(tok, path));
        }
        rows.push_back(std::move(row));
    }
    const int v = static_cast<int>(rows.size());
    Matrix w(v);
    for (int r = 0; r < v; ++r) {
        if (static_cast<int>(rows[r].size()) != v) {
            throw DataError(entry_context(subject, visit) + ": matrix file " + path + " is not square");
        }
        for (int c = 0; c < v; ++c) w(r, c) = rows[r][c];
    }
    return w;
}

Dataset load_csv_bundle(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest file: " + path);
    const fs::path base = fs::path(path).parent_path();

    struct Row {
        int subject_id;
        int y;
        int visit_index;
        double age;
        std::string file;
    };
    std::vector<Row> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto toks = split_csv_line(line);
        if (first) {
            first = false;
            if (!toks.empty() && toks[0] == "subject_id") continue;  // header
        }
        if (toks.size() != 5) throw DataError("manifest row needs 5 columns: " + line);
        Row r;
        r.subject_id = static_cast<int>(parse_double(toks[0], "manifest"));
        r.y = static_cast<int>(parse_double(toks[1], "manifest"));
        r.visit_index = static_cast<int>(parse_double(toks[2], "manifest"));
        r.age = parse_double(toks[3], "manifest");
        r.file = toks[4];
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw DataError("manifest has no data rows: " + path);

    Dataset ds;
    int max_id = -1;
    for (const auto& r : rows) max_id = std::max(max_id, r.subject_id);
    ds.subjects.resize(max_id + 1);
    std::vector<std::vector<std::pair<int, Visit>>> pending(max_id + 1);
    for (const auto& r : rows) {
        if (r.y != 0 && r.y != 1) {
            throw DataError("subject " + std::to_string(r.subject_id) + ": label must be 0 or 1");
        }
        ds.subjects[r.subject_id].label = r.y;
        Visit visit;
        visit.age = r.age;
        visit.network = load_matrix_csv((base / r.file).string(), r.subject_id, r.visit_index);
        if (opts.symmetrize) symmetrize_in_place(visit.network);
        pending[r.subject_id].emplace_back(r.visit_index, std::move(visit));
    }
    for (auto& vec : pending) {
        std::sort(vec.begin(), vec.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    for (int i = 0; i <= max_id; ++i) {
        for (auto& [vi, visit] : pending[i]) {
            ds.subjects[i].visits.push_back(std::move(visit));
        }
    }
    if (!ds.subjects.empty() && !ds.subjects[0].visits.empty()) {
        ds.n_nodes = ds.subjects[0].visits[0].network.n();
    }
    return ds;
}

void save_json(const Dataset& ds, const std::string& path) {
    json doc;
    doc["V"] = ds.n_nodes;
    json subjects = json::array();
    for (const auto& s : ds.subjects) {
        json js;
        js["y"] = s.label;
        json visits = json::array();
        for (const auto& v : s.visits) {
            json jv;
            jv["age"] = v.age;
            json rows = json::array();
            for (int r = 0; r < v.network.n(); ++r) {
                json row = json::array();
                for (int c = 0; c < v.network.n(); ++c) row.push_back(v.network(r, c));
                rows.push_back(std::move(row));
            }
            jv["W"] = std::move(rows);
            visits.push_back(std::move(jv));
        }
        js["visits"] = std::move(visits);
        subjects.push_back(std::move(js));
    }
    doc["subjects"] = std::move(subjects);
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file: " + path);
    out << doc.dump(1) << "\n";
}

void save_csv_bundle(const Dataset& ds, const std::string& path) {
    const fs::path base = fs::path(path).parent_path();
    std::ofstream manifest(path);
    if (!manifest) throw DataError("cannot write manifest file: " + path);
    manifest << "subject_id,y,visit_index,age,matrix_file\n";
    for (int i = 0; i < ds.n_subjects(); ++i) {
        const auto& s = ds.subjects[i];
        for (int vi = 0; vi < static_cast<int>(s.visits.size()); ++vi) {
            char name[64];
            std::snprintf(name, sizeof(name), "subject%04d_visit%02d.csv", i, vi);
            manifest << i << "," << s.label << "," << vi << ","
                     << format_double(s.visits[vi].age) << "," << name << "\n";
            std::ofstream mat(base / name);
            if (!mat) throw DataError(std::string("cannot write matrix file: ") + name);
            const Matrix& w = s.visits[vi].network;
            for (int r = 0; r < w.n(); ++r) {
                for (int c = 0; c < w.n(); ++c) {
                    if (c) mat << ",";
                    mat << format_double(w(r, c));
                }
                mat << "\n";
            }
        }
    }
}

}  // namespace

void validate(const Dataset& dataset) {
    if (dataset.n_nodes < 2) throw DataError("dataset must have V >= 2 nodes");
    for (int i = 0; i < dataset.n_subjects(); ++i) {
        const auto& s = dataset.subjects[i];
        if (s.label != 0 && s.label != 1) {
            throw DataError("subject " + std::to_string(i) + ": label must be 0 or 1");
        }
        if (s.visits.empty()) {
            throw DataError("subject " + std::to_string(i) + ": needs at least one visit");
        }
        double prev_age = -std::numeric_limits<double>::infinity();
        for (int vi = 0; vi < static_cast<int>(s.visits.size()); ++vi) {
            const auto& visit = s.visits[vi];
            if (!std::isfinite(visit.age)) {
                throw DataError(entry_context(i, vi) + ": non-finite age");
            }
            if (visit.age < prev_age) {
                throw DataError(entry_context(i, vi) + ": ages must be non-decreasing within a subject");
            }
            prev_age = visit.age;
            check_matrix(visit.network, dataset.n_nodes, i, vi, false);
        }
    }
}

Dataset load_dataset(const std::string& path, DatasetFormat format, const LoadOptions& opts) {
    Dataset ds = (format == DatasetFormat::Json) ? load_json(path, opts) : load_csv_bundle(path, opts);
    validate(ds);
    return ds;
}

void save_dataset(const Dataset& dataset, const std::string& path, DatasetFormat format) {
    if (format == DatasetFormat::Json) {
        save_json(dataset, path);
    } else {
        save_csv_bundle(dataset, path);
    }
}

std::pair<StandardizedDataset, StandardizationStats> standardize(const Dataset& dataset) {
    if (dataset.n_subjects() < 1) throw DataError("standardize: empty dataset");
    const int v = dataset.n_nodes;

    StandardizationStats stats;
    stats.edge_mean = Matrix(v);
    stats.edge_sd = Matrix(v);

    Matrix sum(v), sumsq(v);
    double age_sum = 0.0, age_sumsq = 0.0, agesq_sum = 0.0, agesq_sumsq = 0.0;
    long count = 0;
    for (const auto& s : dataset.subjects) {
        for (const auto& visit : s.visits) {
            ++count;
            const double g = visit.age;
            const double g2 = g * g;
            age_sum += g;
            age_sumsq += g * g;
            agesq_sum += g2;
            agesq_sumsq += g2 * g2;
            const auto& wd = visit.network.data();
            auto& sd = sum.data();
            auto& sqd = sumsq.data();
            for (std::size_t k = 0; k < wd.size(); ++k) {
                sd[k] += wd[k];
                sqd[k] += wd[k] * wd[k];
            }
        }
    }
    if (count == 0) throw DataError("standardize: no observations");
    const double inv = 1.0 / static_cast<double>(count);

    for (std::size_t k = 0; k < sum.data().size(); ++k) {
        const double m = sum.data()[k] * inv;
        const double var = std::max(0.0, sumsq.data()[k] * inv - m * m);
        stats.edge_mean.data()[k] = m;
        stats.edge_sd.data()[k] = std::sqrt(var);
    }
    stats.age_mean = age_sum * inv;
    stats.age_sd = std::sqrt(std::max(0.0, age_sumsq * inv - stats.age_mean * stats.age_mean));
    stats.agesq_mean = agesq_sum * inv;
    stats.agesq_sd = std::sqrt(std::max(0.0, agesq_sumsq * inv - stats.agesq_mean * stats.agesq_mean));

    return {apply_standardization(dataset, stats), stats};
}

StandardizedDataset apply_standardization(const Dataset& dataset, const StandardizationStats& stats) {
    const int v = dataset.n_nodes;
    StandardizedDataset out;
    out.n_nodes = v;
    out.subjects.reserve(dataset.subjects.size());
    for (const auto& s : dataset.subjects) {
        StdSubject ss;
        ss.label = s.label;
        ss.visits.reserve(s.visits.size());
        for (const auto& visit : s.visits) {
            StdVisit sv;
            sv.age = stats.age_sd > 0.0 ? (visit.age - stats.age_mean) / stats.age_sd : 0.0;
            const double g2 = visit.age * visit.age;
            sv.agesq = stats.agesq_sd > 0.0 ? (g2 - stats.agesq_mean) / stats.agesq_sd : 0.0;
            sv.network = Matrix(v);
            const auto& wd = visit.network.data();
            const auto& md = stats.edge_mean.data();
            const auto& sd = stats.edge_sd.data();
            auto& od = sv.network.data();
            for (std::size_t k = 0; k < wd.size(); ++k) {
                od[k] = sd[k] > 0.0 ? (wd[k] - md[k]) / sd[k] : 0.0;
            }
            for (int r = 0; r < v; ++r) sv.network(r, r) = 0.0;
            ss.visits.push_back(std::move(sv));
        }
        out.subjects.push_back(std::move(ss));
    }
    return out;
}

std::vector<DesignTriple> build_design(const StandardizedDataset& dataset) {
    const int v = dataset.n_nodes;
    std::vector<DesignTriple> designs;
    designs.reserve(dataset.subjects.size());
    for (const auto& s : dataset.subjects) {
        DesignTriple d{Matrix(v), Matrix(v), Matrix(v)};
        const double inv_t = 1.0 / static_cast<double>(s.visits.size());
        for (const auto& visit : s.visits) {
            const auto& wd = visit.network.data();
            auto& x0 = d.x0.data();
            auto& x1 = d.x1.data();
            auto& x2 = d.x2.data();
            const double a1 = visit.age;
            const double a2 = visit.agesq;
            for (std::size_t k = 0; k < wd.size(); ++k) {
                x0[k] += wd[k];
                x1[k] += a1 * wd[k];
                x2[k] += a2 * wd[k];
            }
        }
        for (auto* m : {&d.x0, &d.x1, &d.x2}) {
            for (double& x : m->data()) x *= inv_t;
        }
        designs.push_back(std::move(d));
    }
    return designs;
}

std::vector<int> labels_of(const Dataset& dataset) {
    std::vector<int> out;
    out.reserve(dataset.subjects.size());
    for (const auto& s : dataset.subjects) out.push_back(s.label);
    return out;
}

std::vector<int> labels_of(const StandardizedDataset& dataset) {
    std::vector<int> out;
    out.reserve(dataset.subjects.size());
    for (const auto& s : dataset.subjects) out.push_back(s.label);
    return out;
}

}  // namespace sblr
