#include <filesystem>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "metacoarse/afg.hpp"
#include "metacoarse/coarsen.hpp"
#include "metacoarse/explain.hpp"
#include "metacoarse/interchange.hpp"
#include "metacoarse/metrics.hpp"
#include "metacoarse/pipeline.hpp"
#include "metacoarse/synthetic.hpp"

namespace py = pybind11;
using namespace metacoarse;

namespace {

CoarseningMethod method_from(const std::string& name) {
  const auto m = parse_coarsening_method(name);
  if (!m) throw py::value_error("unknown coarsening method " + name);
  return *m;
}

std::vector<std::pair<NodeId, NodeId>> edge_pairs(const std::vector<Edge>& edges) {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edges.size());
  for (const Edge& e : edges) out.emplace_back(e.src, e.dst);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "CFG coarsening, explanation backtracking and metrics";
  m.attr("__version__") = kVersion;

  py::register_exception<PipelineError>(m, "PipelineError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<SampleGraph>(m, "SampleGraph")
      .def_static("from_json", [](const std::string& line) { return parse_sample(line); })
      .def("to_json", &serialize_sample)
      .def_property_readonly("id", &SampleGraph::id)
      .def_property_readonly("level", [](const SampleGraph& g) { return std::string(to_string(g.level())); })
      .def_property_readonly("label", [](const SampleGraph& g) { return to_int(g.label()); })
      .def_property_readonly("nodes", &SampleGraph::nodes)
      .def_property_readonly("edges", [](const SampleGraph& g) { return edge_pairs(g.edges()); })
      .def_property_readonly("num_nodes", &SampleGraph::num_nodes)
      .def_property_readonly("num_edges", &SampleGraph::num_edges)
      .def_property_readonly("instruction_count", &SampleGraph::instruction_count)
      .def("__repr__", [](const SampleGraph& g) {
        return "<SampleGraph " + g.id() + " " + std::string(to_string(g.level())) + " nodes=" +
               std::to_string(g.num_nodes()) + " edges=" + std::to_string(g.num_edges()) + ">";
      });

  m.def(
      "generate_synthetic",
      [](std::size_t count, std::uint64_t seed, double malicious_fraction) {
        SyntheticSpec spec = SyntheticSpec::planted_cycle();
        spec.malicious_fraction = malicious_fraction;
        return generate_synthetic(count, spec, seed);
      },
      py::arg("count"), py::arg("seed"), py::arg("malicious_fraction") = 0.5);
  m.def("load_samples", [](const std::filesystem::path& path) { return load_samples(path).samples; });
  m.def("save_samples", [](const std::filesystem::path& path, const std::vector<SampleGraph>& samples) {
    save_samples(path, samples);
  });

  m.def(
      "build_afg",
      [](const SampleGraph& cfg) {
        AfgResult r = build_afg(cfg);
        py::dict lists;
        for (NodeId c : r.correspondence.cfg_nodes()) lists[py::int_(c)] = r.correspondence.instruction_list(c);
        const bool degrees_ok = check_degree_preservation(cfg, r.afg, r.correspondence).all_pass();
        return py::make_tuple(std::move(r.afg), lists, degrees_ok);
      },
      "Returns (afg, {cfg node: instruction list}, degree check passed).");

  m.def(
      "coarsen",
      [](const SampleGraph& g, const std::string& method, double ratio) {
        CoarseningResult r = coarsen(g, method_from(method), ratio);
        return py::make_tuple(std::move(r.coarse), r.map.blocks());
      },
      py::arg("graph"), py::arg("method"), py::arg("ratio"), "Returns (coarse graph, blocks by supernode).");
  m.def("coarse_size_bound", &coarse_size_bound);
  m.def("laplacian", [](const SampleGraph& g) { return laplacian(symmetrized_adjacency(g)); });
  m.def("kron_kept_set", &kron_kept_set, py::arg("laplacian"), py::arg("min_kept") = 1);
  m.def("kron_reduce", [](const Eigen::MatrixXd& L, const std::vector<std::size_t>& kept) {
    return kron_reduce(L, kept);
  });

  m.def(
      "select_tes",
      [](const SampleGraph& g, const Eigen::VectorXd& attribution, double epsilon) {
        const ExplanationMask mask = select_tes(g, attribution, {SelectionMethod::kTes, epsilon});
        py::dict out;
        out["ranked"] = mask.ranked;
        out["selected_edges"] = mask.selected_edges;
        out["unimportant_edges"] = mask.unimportant_edges;
        out["selected_nodes"] = mask.selected_nodes;
        return out;
      },
      py::arg("graph"), py::arg("attribution"), py::arg("epsilon") = 0.1);
  m.def("tes_node_budget", &tes_node_budget);

  m.def("characterization", py::overload_cast<double, double, double, double>(&characterization),
        py::arg("fid_plus"), py::arg("fid_minus"), py::arg("w_plus") = 0.5, py::arg("w_minus") = 0.5);
  m.def("lambda_score", &lambda_score);
  m.def("fidelity_scores", [](const std::vector<bool>& removed, const std::vector<bool>& kept) {
    const FidelityScores f = fidelity_scores(removed, kept);
    return py::make_tuple(f.fid_plus, f.fid_minus);
  });
  m.def("accuracy", [](const std::vector<int>& predictions, const std::vector<int>& labels) {
    return inference_metrics(predictions, labels).accuracy;
  });

  // Pipeline entry points take and return JSON text; the Python layer wraps them.
  m.def(
      "run_pipeline",
      [](const std::string& config_json) {
        const RunConfig config = RunConfig::from_json(config_json);
        py::gil_scoped_release release;
        return run_pipeline(config).report.to_json();
      },
      "Runs every phase for a JSON run config and returns the metrics report as JSON.");
  m.def("report_from_run", [](const std::filesystem::path& dir) { return report_from_run(dir).to_json(); });
  m.def(
      "sweep",
      [](const std::string& base_json, const std::vector<std::string>& methods, const std::vector<double>& ratios) {
        const RunConfig base = RunConfig::from_json(base_json);
        std::vector<CoarseningMethod> ms;
        for (const std::string& s : methods) ms.push_back(method_from(s));
        const auto configs = sweep_grid(base, ms, ratios);
        SweepResult r;
        {
          py::gil_scoped_release release;
          r = sweep(configs);
        }
        return py::make_tuple(r.inference_table(), r.explainability_table(), r.trained_models);
      },
      py::arg("base_config"), py::arg("methods"), py::arg("ratios"));
}
