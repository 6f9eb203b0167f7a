#include "petal/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace petal {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double x = m(r, c);
            if (!std::isfinite(x)) throw NumericError("checkpoint contains a non-finite value");
            row.push_back(x);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j, Eigen::Index rows, Eigen::Index cols,
                                 const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
        throw DataError(std::string("checkpoint field has wrong shape: ") + what);
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const ordered_json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw DataError(std::string("checkpoint field has wrong shape: ") + what);
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double x = row[static_cast<std::size_t>(c)].get<double>();
            if (!std::isfinite(x)) throw NumericError("checkpoint contains a non-finite value");
            m(r, c) = x;
        }
    }
    return m;
}

ordered_json vector_to_json(const Eigen::VectorXd& x) {
    ordered_json out = ordered_json::array();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x(i))) throw NumericError("checkpoint contains a non-finite value");
        out.push_back(x(i));
    }
    return out;
}

Eigen::VectorXd vector_from_json(const ordered_json& j, Eigen::Index n, const char* what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
        throw DataError(std::string("checkpoint field has wrong shape: ") + what);
    }
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = j[static_cast<std::size_t>(i)].get<double>();
        if (!std::isfinite(v)) throw NumericError("checkpoint contains a non-finite value");
        x(i) = v;
    }
    return x;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const PolicyParams& params,
                     const std::string& config_hash) {
    ordered_json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["config_hash"] = config_hash;
    j["d"] = params.d;
    j["v"] = params.v;
    j["xi"] = params.xi;
    j["set_sizes"] = params.set_sizes;
    j["shared_preferences"] = params.shared_preferences;
    if (!std::isfinite(params.w_p)) throw NumericError("checkpoint contains a non-finite value");
    j["w_p"] = params.w_p;
    j["M"] = matrix_to_json(params.M);
    j["W"] = matrix_to_json(params.W);
    ordered_json prefs = ordered_json::object();
    for (const auto& [key, bundle] : params.prefs) {
        ordered_json logits = ordered_json::array();
        for (const Eigen::VectorXd& l : bundle.logits) logits.push_back(vector_to_json(l));
        prefs[key] = std::move(logits);
    }
    j["prefs"] = std::move(prefs);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open checkpoint file for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw DataError("failed writing checkpoint file: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint file: " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const ordered_json::parse_error& e) {
        throw DataError("checkpoint is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw DataError("checkpoint root is not a JSON object");
    const int version = j.value("format_version", -1);
    if (version != kCheckpointFormatVersion) {
        throw DataError("unsupported checkpoint format version " + std::to_string(version));
    }
    for (const char* field : {"config_hash", "d", "v", "xi", "set_sizes", "shared_preferences",
                              "w_p", "M", "W", "prefs"}) {
        if (!j.contains(field)) {
            throw DataError(std::string("checkpoint is missing field: ") + field);
        }
    }

    Checkpoint ck;
    ck.config_hash = j["config_hash"].get<std::string>();
    PolicyParams& p = ck.params;
    p.d = j["d"].get<int>();
    p.v = j["v"].get<int>();
    p.xi = j["xi"].get<double>();
    p.set_sizes = j["set_sizes"].get<std::vector<int>>();
    p.shared_preferences = j["shared_preferences"].get<bool>();
    p.w_p = j["w_p"].get<double>();
    if (!std::isfinite(p.w_p)) throw NumericError("checkpoint contains a non-finite value");
    if (p.d <= 0 || p.v <= 0) throw DataError("checkpoint has non-positive dimensions");
    p.M = matrix_from_json(j["M"], p.v, p.d, "M");
    p.W = matrix_from_json(j["W"], p.d, 4 * p.d, "W");
    const ordered_json& prefs = j["prefs"];
    if (!prefs.is_object()) throw DataError("checkpoint prefs is not an object");
    for (const auto& [key, logits] : prefs.items()) {
        if (!logits.is_array() || logits.size() != p.set_sizes.size()) {
            throw DataError("checkpoint prefs for " + key + " has wrong number of choice sets");
        }
        PersonalPreferences bundle;
        bundle.logits.reserve(p.set_sizes.size());
        for (std::size_t s = 0; s < p.set_sizes.size(); ++s) {
            bundle.logits.push_back(
                vector_from_json(logits[s], p.set_sizes[s], "prefs logits"));
        }
        p.prefs.emplace(key, std::move(bundle));
    }
    return ck;
}

std::string hash_text(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

}  // namespace petal
