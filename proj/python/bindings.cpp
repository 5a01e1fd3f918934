#include "dkgqa/config.hpp"
#include "dkgqa/dataset_io.hpp"
#include "dkgqa/errors.hpp"
#include "dkgqa/kg_store.hpp"
#include "dkgqa/pipeline.hpp"
#include "dkgqa/stats.hpp"
#include "dkgqa/steiner.hpp"
#include "dkgqa/text.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <tuple>

namespace py = pybind11;
using namespace dkgqa;

namespace {

py::object to_python(const nlohmann::ordered_json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

PipelineConfig make_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
    auto cfg = path.empty() ? PipelineConfig{} : load_config(path);
    for (const auto& [k, v] : overrides) cfg.set(k, v);
    return cfg;
}

py::dict variant_dict(const DatasetVariant& v) {
    py::dict splits;
    for (const auto& [split, records] : v.records) {
        py::list out;
        for (const auto& r : records) out.append(to_python(to_json(r)));
        splits[py::str(std::string(to_string(split)))] = out;
    }
    py::dict d;
    d["manifest"] = to_python(to_json(v.manifest));
    d["splits"] = splits;
    return d;
}

std::tuple<std::string, std::string, std::string> triple_strings(const KnowledgeGraph& kg, const Triple& t) {
    return {kg.entity_iri(t.subject), kg.predicate_iri(t.predicate),
            t.has_entity_object() ? kg.entity_iri(t.object_entity()) : format_term(kg, t.object)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Dynamic KGQA dataset builder";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DegenerateTableError>(m, "DegenerateTableError", PyExc_ValueError);

    // stats
    m.def(
        "chi_square",
        [](const std::vector<std::vector<double>>& table) {
            const auto r = stats::chi_square(table);
            return std::make_tuple(r.chi2, r.dof, r.p_value);
        },
        py::arg("table"), "Pearson test of independence; returns (chi2, dof, p).");
    m.def("chi_square_sf", &stats::chi_square_sf, py::arg("chi2"), py::arg("dof"));
    m.def("regularized_gamma_q", &stats::regularized_gamma_q, py::arg("a"), py::arg("x"));
    m.def("cramers_v", &stats::cramers_v, py::arg("chi2"), py::arg("n"), py::arg("r"), py::arg("c"));
    m.def("question_jaccard", &stats::question_jaccard);

    // text
    m.def("normalize_label", [](const std::string& s) { return text::normalize_label(s); });
    m.def("normalize_question", [](const std::string& s) { return text::normalize_question(s); });

    // graph
    m.def(
        "mehlhorn_steiner",
        [](std::size_t nodes, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
           const std::vector<std::uint32_t>& terminals) {
            std::vector<graph::Edge> es;
            for (const auto& [u, v] : edges) es.push_back({u, v});
            return graph::mehlhorn_steiner(nodes, es, terminals);
        },
        py::arg("node_count"), py::arg("edges"), py::arg("terminals"),
        "Indices of the chosen edges, ascending.");

    py::class_<KnowledgeGraph>(m, "KnowledgeGraph")
        .def_static(
            "load",
            [](const std::string& path, const std::string& labels) {
                auto kg = parse_ntriples_file(path);
                if (!labels.empty()) {
                    std::ifstream in(labels);
                    if (!in) throw IoError("cannot open " + labels);
                    kg.load_labels(in);
                }
                return kg;
            },
            py::arg("path"), py::arg("labels") = "")
        .def_property_readonly("entity_count", &KnowledgeGraph::entity_count)
        .def_property_readonly("triple_count", &KnowledgeGraph::triple_count)
        .def("label", [](const KnowledgeGraph& kg, const std::string& iri) -> std::optional<std::string> {
            const auto id = kg.find_entity(iri);
            if (!id) return std::nullopt;
            const auto l = kg.entity_label(*id);
            return l ? std::optional<std::string>(*l) : std::nullopt;
        })
        .def("neighbors", [](const KnowledgeGraph& kg, const std::string& iri) {
            std::vector<std::tuple<std::string, std::string, std::string>> out;
            const auto id = kg.find_entity(iri);
            if (!id) throw LookupError("unknown entity " + iri);
            for (const auto& t : kg.neighbors(*id)) out.push_back(triple_strings(kg, t));
            return out;
        });

    // pipeline
    m.def("config_keys", &config_keys);
    m.def(
        "generate",
        [](const std::string& config, const std::map<std::string, std::string>& overrides) {
            const auto cfg = make_config(config, overrides);
            DatasetVariant v;
            {
                py::gil_scoped_release nogil;
                v = cmd_generate(cfg);
            }
            return variant_dict(v);
        },
        py::arg("config"), py::arg("overrides") = std::map<std::string, std::string>{},
        "Runs the full pipeline and returns {'manifest': ..., 'splits': ...}.");
    m.def(
        "variant",
        [](const std::string& config, const std::map<std::string, std::string>& overrides) {
            const auto cfg = make_config(config, overrides);
            DatasetVariant v;
            {
                py::gil_scoped_release nogil;
                v = cmd_variant(cfg);
            }
            return variant_dict(v);
        },
        py::arg("config"), py::arg("overrides") = std::map<std::string, std::string>{});
    m.def("read_variant", [](const std::string& dir, const std::string& id) { return variant_dict(read_variant(dir, id)); });
    m.def(
        "consistency",
        [](const std::string& dir, const std::vector<std::string>& ids, double jaccard_threshold) {
            std::vector<DatasetVariant> vs;
            for (const auto& id : ids) vs.push_back(read_variant(dir, id));
            const auto labeler = make_labeler(PipelineConfig{});
            py::list rows;
            for (const auto& r : compare_variants(vs, *labeler, {jaccard_threshold})) rows.append(to_python(stats::to_json(r)));
            return rows;
        },
        py::arg("dir"), py::arg("variant_ids"), py::arg("jaccard_threshold") = 0.6);
}
