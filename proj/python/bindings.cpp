// SPDX-License-Identifier: Apache-2.0
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "egtsyn/checkpoint.hpp"
#include "egtsyn/errors.hpp"
#include "egtsyn/metrics.hpp"
#include "egtsyn/molgraph.hpp"
#include "egtsyn/smiles.hpp"
#include "egtsyn/version.hpp"

namespace py = pybind11;
using namespace egtsyn;

namespace {

py::array_t<double> to_numpy(const Tensor& t) {
  py::array_t<double> out({t.rows(), t.cols()});
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

py::dict graph_dict(const molgraph::FeatureGraph& g) {
  py::dict d;
  d["features"] = to_numpy(g.node_features);
  d["adjacency"] = to_numpy(g.adjacency_norm);
  d["edges"] = g.edges;
  return d;
}

py::object optional_float(const std::optional<double>& v) {
  return v ? py::object(py::float_(*v)) : py::object(py::none());
}

}  // namespace

PYBIND11_MODULE(_egtsyn, m) {
  m.doc() = "Drug-pair synergy classification on dual molecular graphs.";
  m.attr("__version__") = std::string(kVersion);

  auto base = py::register_exception<Error>(m, "EgtsynError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "SmilesError", base.ptr());

  py::class_<smiles::Molecule>(m, "Molecule")
      .def_property_readonly("num_atoms", [](const smiles::Molecule& mol) { return mol.atoms.size(); })
      .def_property_readonly("num_bonds", [](const smiles::Molecule& mol) { return mol.bonds.size(); })
      .def_property_readonly("elements",
                             [](const smiles::Molecule& mol) {
                               std::vector<std::string> out;
                               for (const auto& a : mol.atoms) out.push_back(a.element);
                               return out;
                             })
      .def_property_readonly("aromatic",
                             [](const smiles::Molecule& mol) {
                               std::vector<bool> out;
                               for (const auto& a : mol.atoms) out.push_back(a.aromatic);
                               return out;
                             })
      .def_property_readonly("bonds",
                             [](const smiles::Molecule& mol) {
                               std::vector<std::pair<std::size_t, std::size_t>> out;
                               for (const auto& b : mol.bonds) out.emplace_back(b.a, b.b);
                               return out;
                             })
      .def_property_readonly("ring_bonds", &smiles::ring_membership)
      .def_property_readonly("source", [](const smiles::Molecule& mol) { return mol.source; })
      .def("__repr__", [](const smiles::Molecule& mol) {
        return "<Molecule '" + mol.source + "' atoms=" + std::to_string(mol.atoms.size()) +
               " bonds=" + std::to_string(mol.bonds.size()) + ">";
      });

  m.def("parse_smiles", [](const std::string& s) { return smiles::parse(s); }, py::arg("smiles"),
        "Parse a SMILES string into heavy atoms and bonds.");

  m.def(
      "featurize",
      [](const std::string& s) {
        const auto g = molgraph::build_dual_graph(smiles::parse(s));
        py::dict d;
        d["atom_graph"] = graph_dict(g.atom_graph);
        d["atom_bond_graph"] = graph_dict(g.atom_bond_graph);
        return d;
      },
      py::arg("smiles"),
      "Atom graph and atom-bond graph: 78-wide node features and normalized adjacency.");

  m.def(
      "dump_graph",
      [](const std::string& s) { return molgraph::dump(molgraph::build_dual_graph(smiles::parse(s)), s); },
      py::arg("smiles"));

  py::class_<model::SynergyModel>(m, "Model")
      .def_static(
          "load", [](const std::string& path) { return load_checkpoint(path).model; },
          py::arg("path"))
      .def_property_readonly("variant",
                             [](const model::SynergyModel& net) {
                               return std::string(model::variant_name(net.config().variant));
                             })
      .def_property_readonly("cell_width",
                             [](const model::SynergyModel& net) { return net.config().cell_input_dim; })
      .def_property_readonly("parameter_names", &model::SynergyModel::parameter_names)
      .def_property_readonly("parameter_count", &model::SynergyModel::parameter_count)
      .def(
          "predict",
          [](const model::SynergyModel& net, const std::string& a, const std::string& b,
             const std::vector<double>& expression) {
            const auto ga = molgraph::build_dual_graph(smiles::parse(a), "drug_a");
            const auto gb = molgraph::build_dual_graph(smiles::parse(b), "drug_b");
            py::gil_scoped_release release;
            return net.predict_pair(ga, gb, expression);
          },
          py::arg("drug_a"), py::arg("drug_b"), py::arg("expression"),
          "Order-symmetric synergy probability for one pair on one cell line.");

  m.def("roc_auc", [](const std::vector<int>& y, const std::vector<double>& s) {
    return optional_float(metrics::roc_auc(y, s));
  });
  m.def("pr_auc", [](const std::vector<int>& y, const std::vector<double>& s) {
    return optional_float(metrics::pr_auc(y, s));
  });
  m.def(
      "evaluate_scores",
      [](const std::vector<int>& y, const std::vector<double>& s, double threshold) {
        const auto r = metrics::evaluate_scores(y, s, threshold);
        py::dict d;
        d["roc_auc"] = optional_float(r.roc_auc);
        d["pr_auc"] = optional_float(r.pr_auc);
        d["acc"] = optional_float(r.acc);
        d["bacc"] = optional_float(r.bacc);
        d["prec"] = optional_float(r.prec);
        d["tpr"] = optional_float(r.tpr);
        d["kappa"] = optional_float(r.kappa);
        d["confusion"] = py::dict(py::arg("tp") = r.confusion.tp, py::arg("fp") = r.confusion.fp,
                                  py::arg("tn") = r.confusion.tn, py::arg("fn") = r.confusion.fn);
        d["n"] = r.n;
        return d;
      },
      py::arg("labels"), py::arg("scores"), py::arg("threshold") = 0.5,
      "Report of every metric; undefined ones are None.");

  m.def(
      "gradcheck",
      [](const std::string& variant, std::uint64_t seed, double tolerance) {
        const auto rep = cli::variant_gradcheck(model::parse_variant(variant), seed, tolerance);
        py::dict errors;
        for (const auto& p : rep.parameters) errors[py::str(p.name)] = p.max_rel_error;
        return py::make_tuple(rep.passed, errors);
      },
      py::arg("variant") = "EGTSyn", py::arg("seed") = 0, py::arg("tolerance") = 1e-4,
      "Finite-difference check of one variant; returns (passed, max error per parameter).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run one command-line subcommand; returns (exit code, stdout, stderr).");
}
