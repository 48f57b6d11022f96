// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qcnet/error.hpp"
#include "qcnet/featurize.hpp"
#include "qcnet/homology.hpp"
#include "qcnet/periodic.hpp"
#include "qcnet/qcomplex.hpp"
#include "qcnet/sformer.hpp"
#include "qcnet/structure.hpp"
#include "qcnet/trainer.hpp"

namespace py = pybind11;
using namespace qcnet;

namespace {

py::dict metrics_dict(const MetricsReport& m) {
  py::dict d;
  d["count"] = m.count;
  d["mae"] = m.mae;
  d["mse"] = m.mse;
  d["rmse"] = m.rmse;
  d["mad"] = m.mad;
  d["cod"] = m.cod ? py::cast(*m.cod) : py::none();
  d["pcc"] = m.pcc ? py::cast(*m.pcc) : py::none();
  d["mad_mae_ratio"] = m.mad_mae_ratio ? py::cast(*m.mad_mae_ratio) : py::none();
  d["status"] = m.status;
  return d;
}

CrystalStructure make_structure(const Mat3& lattice, std::vector<int> species, const Eigen::MatrixX3d& frac) {
  CrystalStructure s;
  s.lattice = lattice;
  s.species = std::move(species);
  if (static_cast<std::size_t>(frac.rows()) != s.species.size()) {
    throw Error(ErrorKind::MalformedInput, "frac must have one row per species entry");
  }
  for (Eigen::Index i = 0; i < frac.rows(); ++i) s.frac.emplace_back(frac.row(i).transpose());
  return canonicalize(std::move(s));
}

Eigen::MatrixX3d frac_matrix(const CrystalStructure& s) {
  Eigen::MatrixX3d m(static_cast<Eigen::Index>(s.size()), 3);
  for (std::size_t i = 0; i < s.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = s.frac[i].transpose();
  return m;
}

}  // namespace

PYBIND11_MODULE(_qcnet, m) {
  m.doc() = "Quotient-complex crystal property models";

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // Prefix with the kind so Python callers can tell data errors from bad arguments.
      py::set_error(error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<CrystalStructure>(m, "Structure")
      .def(py::init(&make_structure), py::arg("lattice"), py::arg("species"), py::arg("frac"))
      .def_static("from_json", [](const std::string& t) { return parse_structure(t, StructureFormat::Json); })
      .def_static("from_poscar", [](const std::string& t) { return parse_structure(t, StructureFormat::Poscar); })
      .def_static("read", &read_structure_file, py::arg("path"))
      .def("to_json", [](const CrystalStructure& s) { return write_structure(s); })
      .def_property_readonly("lattice", [](const CrystalStructure& s) { return s.lattice; })
      .def_property_readonly("species", [](const CrystalStructure& s) { return s.species; })
      .def_property_readonly("frac", &frac_matrix)
      .def_property_readonly("id", [](const CrystalStructure& s) { return s.id; })
      .def("__len__", &CrystalStructure::size)
      .def("__eq__", [](const CrystalStructure& a, const CrystalStructure& b) { return a == b; });

  py::class_<PeriodicEdge>(m, "Edge")
      .def_readonly("src", &PeriodicEdge::src)
      .def_readonly("dst", &PeriodicEdge::dst)
      .def_readonly("offset", &PeriodicEdge::offset)
      .def_readonly("dist", &PeriodicEdge::dist);

  py::class_<PeriodicGraph>(m, "PeriodicGraph")
      .def_readonly("n_vertices", &PeriodicGraph::n_vertices)
      .def_readonly("k", &PeriodicGraph::k)
      .def_readonly("edges", &PeriodicGraph::edges)
      .def("to_jsonl", &graph_to_jsonl)
      .def("__eq__", [](const PeriodicGraph& a, const PeriodicGraph& b) { return a == b; });

  m.def("neighbor_list", [](const CrystalStructure& s, int k) { return neighbor_list(s, k); }, py::arg("structure"),
        py::arg("k") = 12);
  m.def("brute_force_neighbors", [](const CrystalStructure& s, int k, int radius) {
    return brute_force_neighbors(s, k, radius);
  }, py::arg("structure"), py::arg("k"), py::arg("radius"));

  py::class_<Triangle>(m, "Triangle")
      .def_readonly("e", &Triangle::e)
      .def_readonly("offsets", &Triangle::offsets);

  py::class_<QuotientComplex>(m, "QuotientComplex")
      .def_readonly("graph", &QuotientComplex::graph)
      .def_readonly("triangles", &QuotientComplex::triangles)
      .def_property_readonly("n_vertices", &QuotientComplex::n_vertices)
      .def_property_readonly("n_edges", &QuotientComplex::n_edges)
      .def_property_readonly("n_triangles", &QuotientComplex::n_triangles)
      .def("to_json", [](const QuotientComplex& c) { return complex_to_json(c); });

  m.def("build_complex", [](const PeriodicGraph& g) { return build_complex(g); }, py::arg("graph"));

  py::class_<AtomFeatureTable>(m, "AtomFeatureTable")
      .def_static("placeholder", &AtomFeatureTable::placeholder, py::arg("seed") = 0)
      .def_static("load", &AtomFeatureTable::load, py::arg("path"))
      .def_static("from_json", &AtomFeatureTable::from_json)
      .def("row", &AtomFeatureTable::at, py::arg("z"))
      .def("to_json", &AtomFeatureTable::to_json)
      .def("__len__", &AtomFeatureTable::size);

  m.def("raw_features", [](const QuotientComplex& c, const CrystalStructure& s, const AtomFeatureTable& t) {
    const FeatureSet f = raw_features(c, s, t);
    py::dict d;
    d["h0"] = f.h0_raw;
    d["h1"] = f.h1_raw;
    d["h2"] = f.h2_raw;
    return d;
  }, py::arg("complex"), py::arg("structure"), py::arg("table"));
  m.def("rbf_expand", [](double x, bool edge) { return rbf_expand(x, edge ? RbfBank::edge() : RbfBank::triangle()); },
        py::arg("x"), py::arg("edge_bank") = true);
  m.attr("VERTEX_FEATURE_DIM") = kVertexFeatureDim;
  m.attr("EDGE_FEATURE_DIM") = kEdgeFeatureDim;
  m.attr("TRIANGLE_FEATURE_DIM") = kTriangleFeatureDim;
  m.attr("HIDDEN_DIM") = kHiddenDim;

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("hidden", &ModelConfig::hidden)
      .def_readwrite("node_layers", &ModelConfig::node_layers)
      .def_readwrite("edge_node_layers", &ModelConfig::edge_node_layers)
      .def_readwrite("head_hidden", &ModelConfig::head_hidden);

  py::class_<SformerModel>(m, "Model")
      .def_static("initialized", &SformerModel::initialized, py::arg("config") = ModelConfig{}, py::arg("seed") = 0)
      .def_static("load", &load_checkpoint, py::arg("path"))
      .def("save", [](const SformerModel& model, const std::filesystem::path& p) { save_checkpoint(model, p); })
      .def_property_readonly("config", &SformerModel::config)
      .def("predict", [](SformerModel& model, const CrystalStructure& s, int k, const AtomFeatureTable* table) {
        const QuotientComplex c = build_complex(neighbor_list(s, k));
        const FeatureSet f = raw_features(c, s, table ? *table : AtomFeatureTable::placeholder());
        model.mode = Mode::Eval;
        return predict_one(model, c, f);
      }, py::arg("structure"), py::arg("k") = 12, py::arg("table") = nullptr);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_static("hybrid", &hybrid_preset)
      .def_static("inorganic", &inorganic_preset)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("peak_lr", &TrainConfig::peak_lr)
      .def_readwrite("weight_decay", &TrainConfig::weight_decay)
      .def_readwrite("k_neighbors", &TrainConfig::k_neighbors)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("model", &TrainConfig::model)
      .def_property("loss", [](const TrainConfig& c) { return to_string(c.loss); },
                    [](TrainConfig& c, const std::string& name) { c.loss = parse_loss_kind(name); });

  m.def("train", [](const TrainConfig& cfg, const std::vector<CrystalStructure>& structures,
                    const std::vector<double>& targets, const AtomFeatureTable* table) {
    if (structures.size() != targets.size()) throw Error(ErrorKind::InvalidArgument, "one target per structure");
    std::vector<DatasetRecord> records;
    for (std::size_t i = 0; i < structures.size(); ++i) records.push_back({structures[i], targets[i], std::nullopt});
    const PreparedSet data = prepare(records, cfg.k_neighbors, table ? *table : AtomFeatureTable::placeholder());
    py::gil_scoped_release release;
    TrainResult r = train(cfg, data, {});
    r.model.mode = Mode::Eval;
    std::vector<double> losses;
    for (const auto& h : r.history) losses.push_back(h.train_loss);
    return std::make_pair(std::move(r.model), losses);
  }, py::arg("config"), py::arg("structures"), py::arg("targets"), py::arg("table") = nullptr);

  m.def("compute_metrics", [](const std::vector<double>& y, const std::vector<double>& p) {
    return metrics_dict(compute_metrics(y, p));
  }, py::arg("target"), py::arg("prediction"));
  m.def("kfold_split", [](std::size_t n, int folds, std::uint64_t seed) {
    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> out;
    for (auto& f : kfold_split(n, folds, seed)) out.emplace_back(std::move(f.train), std::move(f.test));
    return out;
  }, py::arg("n"), py::arg("folds") = 5, py::arg("seed") = 0);

  m.def("betti", [](const std::vector<hom::Simplex>& simplices, int q) {
    return hom::betti(hom::SimplicialComplex::from_maximal(simplices), q);
  }, py::arg("simplices"), py::arg("q"));
  m.def("verify_theorem", [](const std::vector<hom::Simplex>& simplices,
                             const std::vector<std::vector<int>>& classes, bool pairwise) {
    const auto k = hom::SimplicialComplex::from_maximal(simplices);
    const auto p = hom::VertexPartition::completed(k, classes);
    if (!pairwise) return hom::report_to_json(hom::verify_theorem(k, p), -1);
    auto r = hom::homology_report(k, hom::build_pairwise(k, p));
    r.construction = "pairwise";
    return hom::report_to_json(r, -1);
  }, py::arg("simplices"), py::arg("classes") = std::vector<std::vector<int>>{}, py::arg("pairwise") = false);
}
