#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pptgnn/checkpoint.hpp"
#include "pptgnn/errors.hpp"
#include "pptgnn/experiments.hpp"
#include "pptgnn/flow_ingest.hpp"
#include "pptgnn/metrics.hpp"
#include "pptgnn/pretrain.hpp"
#include "pptgnn/synthetic.hpp"
#include "pptgnn/trainer.hpp"

namespace py = pybind11;
using namespace pptgnn;

namespace {

struct Dataset {
  PreparedDataset data;
  ModelConfig model;
};

struct Model {
  ModelConfig config;
  ParameterSet params;
  FeatureCodec codec;
  GraphBuildConfig graph;
  LabelVocabulary vocab;
};

py::dict report_dict(const MetricsReport& r) {
  py::dict d;
  d["multiclass_weighted_f1"] = r.multiclass_weighted_f1;
  d["multiclass_macro_f1"] = r.multiclass_macro_f1;
  d["binary_weighted_f1"] = r.binary_weighted_f1;
  d["binary_macro_f1"] = r.binary_macro_f1;
  d["samples"] = r.samples;
  d["class_names"] = r.class_names;
  d["confusion"] = r.confusion;
  d["confusion_normalized"] = r.confusion_normalized;
  py::list per_class;
  for (const auto& m : r.per_class) {
    py::dict c;
    c["precision"] = m.precision;
    c["recall"] = m.recall;
    c["f1"] = m.f1;
    c["support"] = m.support;
    per_class.append(c);
  }
  d["per_class"] = per_class;
  return d;
}

ModelConfig model_config(size_t hidden, size_t layers, const std::string& aggregation) {
  ModelConfig m;
  m.hidden_size = hidden;
  m.classifier_hidden = hidden;
  m.num_layers = layers;
  m.neighbor_aggregation = parse_aggregation(aggregation);
  return m;
}

GraphBuildConfig graph_config(double window_size, size_t window_memory) {
  GraphBuildConfig g;
  g.window_size = window_size;
  g.window_memory = window_memory;
  g.validate();
  return g;
}

SyntheticDataset synthesize(const std::string& kind, size_t size, uint64_t seed, uint64_t member) {
  if (kind == "feature") return feature_separable(size, seed);
  if (kind == "topology") return topology_only(size, seed);
  if (kind == "temporal") {
    TemporalPatternOptions o;
    o.windows = size;
    return temporal_pattern(o, seed);
  }
  if (kind == "planted") return planted_pattern(member, seed, size);
  throw ConfigError("unknown synthetic kind '" + kind + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spatio-temporal flow-graph GNN core";

  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CompatibilityError>(m, "CompatibilityError", PyExc_ValueError);
  py::register_exception<EmptyDataError>(m, "EmptyDataError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);

  py::class_<FlowRecord>(m, "FlowRecord")
      .def(py::init<>())
      .def_readwrite("flow_id", &FlowRecord::flow_id)
      .def_readwrite("start_time", &FlowRecord::start_time)
      .def_readwrite("end_time", &FlowRecord::end_time)
      .def_readwrite("src_ip", &FlowRecord::src_ip)
      .def_readwrite("dst_ip", &FlowRecord::dst_ip)
      .def_readwrite("src_port", &FlowRecord::src_port)
      .def_readwrite("dst_port", &FlowRecord::dst_port)
      .def_readwrite("protocol", &FlowRecord::protocol)
      .def_readwrite("in_bytes", &FlowRecord::in_bytes)
      .def_readwrite("out_bytes", &FlowRecord::out_bytes)
      .def_readwrite("in_pkts", &FlowRecord::in_pkts)
      .def_readwrite("out_pkts", &FlowRecord::out_pkts)
      .def_readwrite("tcp_flags", &FlowRecord::tcp_flags)
      .def_readwrite("duration", &FlowRecord::duration)
      .def_readwrite("label", &FlowRecord::label)
      .def_readwrite("attack_name", &FlowRecord::attack_name)
      .def("__repr__", [](const FlowRecord& r) {
        return "<FlowRecord " + std::to_string(r.flow_id) + " " + r.src_ip + "->" + r.dst_ip + ">";
      });

  m.def(
      "load_csv",
      [](const std::string& path) {
        LoadResult r = load_flow_csv(path, CsvSchema::canonical());
        return py::make_tuple(r.records, r.vocabulary.names(), r.rejected);
      },
      py::arg("path"), "Load a canonical flow CSV: (records, class_names, rejected_rows).");
  m.def("write_cache", [](const std::string& path, const std::vector<FlowRecord>& records) {
    write_flow_cache(path, records);
  });
  m.def("read_cache", &read_flow_cache);
  m.def("to_csv", [](const std::vector<FlowRecord>& records) { return to_canonical_csv(records); });

  m.def(
      "synthesize",
      [](const std::string& kind, size_t size, uint64_t seed, uint64_t member) {
        SyntheticDataset ds = synthesize(kind, size, seed, member);
        return py::make_tuple(ds.flows, ds.vocab.names());
      },
      py::arg("kind"), py::arg("size"), py::arg("seed") = 0, py::arg("member") = 0,
      "Synthetic labeled flows: kind is feature, topology, temporal or planted.");

  m.def("macro_f1", [](const std::vector<int32_t>& t, const std::vector<int32_t>& p, size_t n) {
    return macro_f1(t, p, n);
  });
  m.def("weighted_f1", [](const std::vector<int32_t>& t, const std::vector<int32_t>& p, size_t n) {
    return weighted_f1(t, p, n);
  });

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("feature_dim", [](const Dataset& d) { return d.model.feature_dim; })
      .def_property_readonly("class_names", [](const Dataset& d) { return d.data.vocab.names(); })
      .def_property_readonly("windows", [](const Dataset& d) {
        return py::make_tuple(d.data.train.compiled.size(), d.data.val.compiled.size(), d.data.test.compiled.size());
      });

  m.def(
      "prepare",
      [](const std::vector<FlowRecord>& flows, const std::vector<std::string>& class_names, double window_size,
         size_t window_memory, size_t hidden, size_t layers, const std::string& aggregation,
         std::tuple<double, double, double> ratios) {
        Dataset d;
        d.model = model_config(hidden, layers, aggregation);
        std::vector<std::string> attacks(class_names.begin() + (class_names.empty() ? 0 : 1), class_names.end());
        const GraphBuildConfig g = graph_config(window_size, window_memory);
        d.model.flow_encoding_dim = g.flow_encoding_dim;
        d.model.window_encoding_dim = g.window_encoding_dim;
        d.data = prepare_dataset(flows, LabelVocabulary(attacks), g, d.model,
                                 {std::get<0>(ratios), std::get<1>(ratios), std::get<2>(ratios)});
        return d;
      },
      py::arg("flows"), py::arg("class_names"), py::arg("window_size") = 5.0, py::arg("window_memory") = 5,
      py::arg("hidden") = 64, py::arg("layers") = 2, py::arg("aggregation") = "mean",
      py::arg("ratios") = std::make_tuple(0.7, 0.15, 0.15),
      "Chronological split, codec fit on the training part and window graphs for every part.");

  py::class_<Model>(m, "Model")
      .def_property_readonly("parameters", [](const Model& mo) { return mo.params; })
      .def_property_readonly("class_names", [](const Model& mo) { return mo.vocab.names(); })
      .def("save", [](const Model& mo, const std::string& path) {
        save_checkpoint(path, mo.params, checkpoint_metadata(mo.config, mo.graph, mo.codec, mo.vocab));
      });

  m.def(
      "train",
      [](const Dataset& d, size_t epochs, double lr, uint64_t seed, size_t batch_size) {
        TrainConfig t;
        t.epochs = epochs;
        t.learning_rate = lr;
        t.seed = seed;
        t.batch_size = batch_size;
        Rng rng(seed);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(d.data.train.compiled, d.data.val.compiled, init_parameters(d.model, rng), d.model, t);
        }
        py::list log;
        for (const auto& e : r.log) log.append(py::make_tuple(e.epoch, e.train_loss, e.val_macro_f1));
        return py::make_tuple(Model{d.model, std::move(r.params), d.data.codec, d.data.graph_config, d.data.vocab},
                              log);
      },
      py::arg("dataset"), py::arg("epochs") = 200, py::arg("lr") = 0.001, py::arg("seed") = 0,
      py::arg("batch_size") = 8, "Train from scratch: (model, [(epoch, loss, val_macro_f1)]).");

  m.def(
      "evaluate",
      [](const Model& mo, const Dataset& d, const std::string& split) {
        const SplitGraphs& s = split == "train" ? d.data.train : split == "val" ? d.data.val : d.data.test;
        if (split != "train" && split != "val" && split != "test") throw ConfigError("split must be train, val or test");
        return report_dict(evaluate(s.compiled, mo.params, mo.config, mo.vocab));
      },
      py::arg("model"), py::arg("dataset"), py::arg("split") = "test");

  m.def(
      "load_model",
      [](const std::string& path) {
        Checkpoint ck = load_checkpoint(path);
        const FeatureCodec codec = ck.codec();
        check_compatible(ck, codec.feature_dim());
        return Model{ck.model_config(), std::move(ck.params), codec, ck.graph_config(), ck.vocabulary()};
      },
      py::arg("path"));

  m.def(
      "pretrain",
      [](const Dataset& d, size_t epochs, double lr, uint64_t seed, size_t batch_size) {
        PretrainConfig p;
        p.epochs = epochs;
        p.learning_rate = lr;
        p.seed = seed;
        p.batch_size = batch_size;
        std::vector<CompiledGraph> graphs;
        for (const auto& g : d.data.train.graphs) graphs.push_back(compile_graph(without_labels(g), d.model, false));
        PretrainResult r;
        {
          py::gil_scoped_release release;
          r = pretrain(graphs, d.model, p);
        }
        py::list log;
        for (const auto& e : r.log) log.append(py::make_tuple(e.epoch, e.loss, e.accuracy));
        return py::make_tuple(r.params, log);
      },
      py::arg("dataset"), py::arg("epochs") = 20, py::arg("lr") = 1e-4, py::arg("seed") = 0, py::arg("batch_size") = 1,
      "Link-prediction pre-training on the label-stripped training windows: (parameters, log).");

  m.def(
      "finetune",
      [](const Dataset& d, const ParameterSet& pretrained, double fraction, size_t epochs, double lr, uint64_t seed) {
        Rng rng(seed);
        ParameterSet start = transfer_weights(pretrained, d.model, rng);
        std::vector<CompiledGraph> subset = d.data.train.compiled;
        if (fraction < 1.0) {
          subset.clear();
          for (size_t w : undersample_windows(d.data.train.compiled, d.model.num_classes, fraction, seed).windows) {
            subset.push_back(d.data.train.compiled[w]);
          }
        }
        TrainConfig t;
        t.epochs = epochs;
        t.learning_rate = lr;
        t.seed = seed;
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(subset, d.data.val.compiled, std::move(start), d.model, t);
        }
        return Model{d.model, std::move(r.params), d.data.codec, d.data.graph_config, d.data.vocab};
      },
      py::arg("dataset"), py::arg("pretrained"), py::arg("fraction") = 1.0, py::arg("epochs") = 50,
      py::arg("lr") = 0.01, py::arg("seed") = 0);
}
