#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "simplicial.hpp"

namespace derham {

namespace detail {

inline Rat json_rat(const nlohmann::json& j) {
    if (j.is_number_integer()) return Rat(j.get<long long>());
    if (j.is_string()) return parse_rat(j.get<std::string>());
    throw Error("expected a rational written as an integer or a \"p/q\" string");
}

inline nlohmann::json rat_json(const Rat& r) { return to_string(r); }

}  // namespace detail

/// Reads the complex file format:
///
///     {"dim": 2, "period": ["3", "3"],
///      "simplices": [{"id": 0, "dim": 0, "faces": [],
///                     "frame": {"A": [[...]], "b": [...], "split": 2},
///                     "orientation": 1}, ...]}
///
/// `frame` and `orientation` are optional. A frame places the simplex at
/// b, b + A e_{split+1}, ..., b + A e_n. Simplices must come after their faces.
inline SimplicialComplex complex_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("simplices")) throw Error("complex file needs a 'simplices' list");
    std::optional<Vec> period;
    if (doc.contains("period")) {
        Vec per;
        for (const auto& x : doc.at("period")) per.push_back(detail::json_rat(x));
        period = per;
    }
    SimplicialComplex X(period);
    for (const auto& s : doc.at("simplices")) {
        SimplexRecord r;
        r.id = s.at("id").get<int>();
        r.dim = s.at("dim").get<int>();
        for (const auto& f : s.value("faces", nlohmann::json::array())) {
            if (!f.is_array() || f.size() != 2) throw Error("face entries are [face_id, sign] pairs");
            r.faces.push_back({f[0].get<int>(), f[1].get<int>()});
        }
        r.orientation = s.value("orientation", 1);
        if (s.contains("frame")) {
            const auto& fr = s.at("frame");
            const auto& rows = fr.at("A");
            Vec b;
            for (const auto& x : fr.at("b")) b.push_back(detail::json_rat(x));
            const std::size_t n = b.size();
            if (rows.size() != n) throw Error("frame matrix has wrong size");
            Matrix A(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                if (rows[i].size() != n) throw Error("frame matrix has wrong size");
                for (std::size_t j = 0; j < n; ++j) A(i, j) = detail::json_rat(rows[i][j]);
            }
            const int split = fr.at("split").get<int>();
            if (split < 0 || split > static_cast<int>(n) || static_cast<int>(n) - split != r.dim)
                throw Error("frame split does not match the simplex dimension");
            std::vector<Vec> verts{b};
            for (std::size_t c = split; c < n; ++c) verts.push_back(b + A.column(c));
            r.vertices = verts;
        }
        X.add(std::move(r));
    }
    if (doc.contains("dim") && doc.at("dim").get<int>() != X.dim()) throw Error("'dim' does not match the simplices");
    return X;
}

inline nlohmann::json complex_to_json(const SimplicialComplex& X) {
    nlohmann::json doc;
    doc["dim"] = X.dim();
    if (X.period()) {
        auto per = nlohmann::json::array();
        for (const auto& x : *X.period()) per.push_back(detail::rat_json(x));
        doc["period"] = per;
    }
    auto list = nlohmann::json::array();
    for (const auto& [id, s] : X.simplices()) {
        nlohmann::json e;
        e["id"] = id;
        e["dim"] = s.dim;
        auto faces = nlohmann::json::array();
        for (const auto& [f, sign] : s.faces) faces.push_back({f, sign});
        e["faces"] = faces;
        if (s.vertices) {
            const Frame fr = simplex_frame(*s.vertices);
            auto A = nlohmann::json::array();
            for (std::size_t i = 0; i < fr.map.A.rows(); ++i) {
                auto row = nlohmann::json::array();
                for (std::size_t j = 0; j < fr.map.A.cols(); ++j) row.push_back(detail::rat_json(fr.map.A(i, j)));
                A.push_back(row);
            }
            auto b = nlohmann::json::array();
            for (const auto& x : fr.map.b) b.push_back(detail::rat_json(x));
            e["frame"] = {{"A", A}, {"b", b}, {"split", fr.split}};
        }
        if (s.orientation != 1) e["orientation"] = s.orientation;
        list.push_back(e);
    }
    doc["simplices"] = list;
    return doc;
}

inline SimplicialComplex read_complex(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(path + ": " + e.what());
    }
    try {
        return complex_from_json(doc);
    } catch (const nlohmann::json::exception& e) {
        throw Error(path + ": " + e.what());
    }
}

}  // namespace derham
