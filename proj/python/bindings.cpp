#include <insight/agent/backend.hpp>
#include <insight/agent/session.hpp>
#include <insight/agent/trace.hpp>
#include <insight/benchgen.hpp>
#include <insight/dsl/evaluator.hpp>
#include <insight/dsl/parser.hpp>
#include <insight/evalharness.hpp>
#include <insight/retrieval.hpp>
#include <insight/service.hpp>
#include <insight/synthgen.hpp>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace insight;

namespace {

py::object loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

std::string dumps(const py::handle& obj) { return py::module_::import("json").attr("dumps")(obj).cast<std::string>(); }

std::map<std::string, UserDataset> by_id(const std::vector<UserDataset>& users) {
  std::map<std::string, UserDataset> out;
  for (const auto& u : users) out.emplace(u.user_id, u);
  return out;
}

}  // namespace

PYBIND11_MODULE(_insight, m) {
  m.doc() = "insight core bindings";

  py::class_<UserDataset>(m, "Dataset")
      .def_readonly("user_id", &UserDataset::user_id)
      .def_property_readonly("today", [](const UserDataset& ds) { return format_date(ds.today); })
      .def_property_readonly("days", [](const UserDataset& ds) { return ds.daily.size(); })
      .def_property_readonly("activities", [](const UserDataset& ds) { return ds.activities.size(); })
      .def_property_readonly("age", [](const UserDataset& ds) { return ds.context.age; })
      .def_property_readonly("gender", [](const UserDataset& ds) { return std::string(to_string(ds.context.gender)); })
      .def("daily_rows", [](const UserDataset& ds) { return loads(service::daily_rows_json(ds, std::nullopt, std::nullopt)); })
      .def("markdown", &render_markdown, py::arg("max_days") = 31)
      .def("violations",
           [](const UserDataset& ds) {
             std::vector<std::string> out;
             for (const auto& v : validate_dataset(ds)) out.push_back(to_string(v));
             return out;
           })
      .def("__repr__", [](const UserDataset& ds) {
        return "<Dataset " + ds.user_id + ", " + std::to_string(ds.daily.size()) + " days>";
      });

  m.def(
      "generate_cohort",
      [](int n_users, std::uint64_t seed, int days) {
        synth::CohortSpec spec;
        spec.n_users = n_users;
        spec.config = synth::GeneratorConfig::defaults();
        spec.config.seed = seed;
        spec.config.days = days;
        spec.config.validate();
        return synth::generate_cohort(spec);
      },
      py::arg("n_users") = 56, py::arg("seed") = 0, py::arg("days") = 31);
  m.def("save_cohort", &synth::save_cohort, py::arg("users"), py::arg("path"));
  m.def("load_cohort", &synth::load_cohort, py::arg("path"));

  m.def("analyze", &dsl::analyze, py::arg("program"), py::arg("dataset"),
        "Observation text for a program, errors included.");
  m.def(
      "evaluate",
      [](const std::string& program, const UserDataset& ds) -> py::object {
        const auto v = dsl::evaluate(dsl::parse(program), ds);
        if (std::holds_alternative<dsl::NoData>(v)) return py::none();
        if (const double* d = std::get_if<double>(&v)) return py::float_(*d);
        return py::str(dsl::format_observation(v));
      },
      py::arg("program"), py::arg("dataset"),
      "A float, None for NoData, or the observation text for other values.");

  m.def(
      "generate_benchmark",
      [](const std::vector<UserDataset>& users, std::size_t n, std::uint64_t seed) {
        py::list out;
        for (const auto& q : bench::generate_benchmark(users, n, seed)) out.append(loads(bench::to_json_line(q)));
        return out;
      },
      py::arg("users"), py::arg("n"), py::arg("seed") = 0);

  m.def(
      "run_benchmark",
      [](const std::string& method, const py::list& queries, const std::vector<UserDataset>& users,
         const std::string& backend, int jobs, std::uint64_t seed) {
        const auto mth = eval::parse_method(method);
        if (!mth) throw ConfigError("unknown method '" + method + "'");
        std::string text;
        for (const auto& q : queries) text += dumps(q) + "\n";
        const auto qs = bench::parse_jsonl(text);
        const auto datasets = by_id(users);
        const auto b = agent::make_backend(backend);
        const auto search = retrieval::default_search_tool();
        eval::RunConfig cfg;
        cfg.jobs = jobs;
        cfg.seed = seed;
        cfg.agent.seed = seed;
        eval::EvalReport rep;
        {
          py::gil_scoped_release release;
          rep = eval::make_report(*mth, eval::run_method(*mth, qs, datasets, *b, search.get(), cfg), seed);
        }
        const py::object all = loads(eval::report_json({rep}));
        return py::object(all["reports"][py::int_(0)]);
      },
      py::arg("method"), py::arg("queries"), py::arg("users"), py::arg("backend") = "oracle", py::arg("jobs") = 1,
      py::arg("seed") = 0);

  m.def("exact_match", [](const std::string& answer, std::optional<double> gold) { return eval::exact_match(answer, gold); },
        py::arg("answer"), py::arg("gold"));

  m.def(
      "search",
      [](const std::string& query, std::size_t k) {
        py::list out;
        for (const auto& r : retrieval::default_index().search(query, k)) {
          py::dict d;
          d["url"] = r.url;
          d["title"] = r.title;
          d["snippet"] = r.snippet;
          d["score"] = r.score;
          out.append(d);
        }
        return out;
      },
      py::arg("query"), py::arg("k") = 3);

  m.def(
      "ask",
      [](const UserDataset& ds, const std::string& question, const std::string& backend, int max_steps) {
        agent::AgentConfig cfg;
        cfg.max_steps = max_steps;
        const auto b = agent::make_backend(backend);
        const auto search = retrieval::default_search_tool();
        agent::SessionResult r;
        {
          py::gil_scoped_release release;
          r = agent::run_session(question, ds, *b, search.get(), cfg, "ask");
        }
        py::list trace;
        for (const auto& s : r.trace) trace.append(loads(agent::to_json(s)));
        py::dict out;
        out["answer"] = r.final_answer ? py::object(py::str(*r.final_answer)) : py::object(py::none());
        out["trace"] = trace;
        return out;
      },
      py::arg("dataset"), py::arg("question"), py::arg("backend") = "demo", py::arg("max_steps") = 8);
}
