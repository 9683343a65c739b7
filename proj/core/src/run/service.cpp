#include "evocounsel/run/service.hpp"

#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "evocounsel/common/errors.hpp"
#include "evocounsel/common/files.hpp"
#include "evocounsel/memory/context.hpp"
#include "evocounsel/run/backends.hpp"
#include "evocounsel/run/runner.hpp"
#include "evocounsel/skills/retrieval.hpp"

namespace evocounsel::run {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct HttpError : Error {
  int status;
  HttpError(int s, const std::string& what) : Error(what), status(s) {}
};

struct LiveSession {
  std::mutex mu;
  std::string id;
  std::string card_id;
  std::optional<std::string> root;
  memory::SessionPlan plan;
  std::vector<memory::Turn> turns;
  bool ended = false;
};

struct RunEntry {
  std::mutex mu;
  std::string id;
  fs::path dir;
  std::unique_ptr<Runner> runner;  // null for runs served read-only
};

json plan_json(const memory::SessionPlan& p) { return memory::to_json(p); }

json session_json(const LiveSession& s) {
  json turns = json::array();
  int turn_id = 0;
  for (const auto& t : s.turns) {
    if (const auto* c = std::get_if<memory::ClientTurn>(&t)) {
      turns.push_back({{"role", "client"}, {"text", c->text}});
    } else {
      const auto& ct = std::get<memory::CounselorTurn>(t);
      turns.push_back({{"role", "counselor"},
                       {"turn_id", ++turn_id},
                       {"text", ct.response},
                       {"reasoning", ct.reasoning},
                       {"skill", {{"id", ct.skill_ref}, {"name", ct.skill_name}}}});
    }
  }
  return {{"session_id", s.id},
          {"status", s.ended ? "ended" : "active"},
          {"card_id", s.card_id},
          {"plan", plan_json(s.plan)},
          {"turns", std::move(turns)}};
}

json candidate_json(const rollout::SessionCandidate& c) {
  std::string preview;
  for (const auto& t : c.transcript.turns) {
    if (const auto* ct = std::get_if<memory::CounselorTurn>(&t)) {
      preview = ct->response.substr(0, 160);
      break;
    }
  }
  return {{"candidate_index", c.candidate_index},
          {"id", c.id},
          {"seed", c.seed},
          {"failed", c.failed},
          {"error", c.error},
          {"aggregate", c.reward ? json(c.reward->aggregate) : json()},
          {"dimension_scores", c.reward ? json(c.reward->dimension_scores) : json::object()},
          {"counselor_turns", c.transcript.counselor_turns()},
          {"preview", preview},
          {"transcript", memory::to_json(c.transcript)}};
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw HttpError(400, std::string("invalid JSON body: ") + e.what());
  }
}

void send_json(httplib::Response& res, const json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(2) + "\n", "application/json");
}

int parse_int(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw HttpError(404, std::string("invalid ") + what + " '" + s + "'");
  }
}

}  // namespace

struct Service::Impl {
  ServiceOptions opt;
  httplib::Server svr;
  std::thread thread;
  int port = 0;

  std::mutex sessions_mu;
  std::map<std::string, std::shared_ptr<LiveSession>> sessions;
  int next_session = 1;

  std::mutex runs_mu;
  std::map<std::string, std::shared_ptr<RunEntry>> runs;

  gateway::BackendHandle counselor;
  std::optional<skills::SkillTree> live_tree;
  std::optional<client::ClientProfileCard> live_card;
  gateway::TaskOptions live_plan_task, live_retrieval_task, live_generation_task;
  std::size_t live_max_objectives = 3;

  explicit Impl(ServiceOptions o) : opt(std::move(o)) {
    if (opt.live) {
      const auto& cfg = *opt.live;
      counselor = make_backend(cfg.counselor, "counselor");
      live_tree = load_seed_tree(cfg);
      live_card = select_card(cfg);
      live_plan_task = {cfg.temperatures.plan, 1024, cfg.max_repairs};
      live_retrieval_task = {cfg.temperatures.retrieval, 1024, cfg.max_repairs};
      live_generation_task = {cfg.temperatures.generation, 1024, cfg.max_repairs};
      live_max_objectives = cfg.max_objectives;
    }
    scan_runs();
    routes();
  }

  void add_run_dir(const fs::path& dir) {
    const auto log_path = dir / "run_log.json";
    if (!fs::exists(log_path)) return;
    try {
      const auto id = files::read_json(log_path).at("run_id").get<std::string>();
      if (runs.contains(id)) return;
      auto e = std::make_shared<RunEntry>();
      e->id = id;
      e->dir = dir;
      runs[id] = std::move(e);
    } catch (const std::exception&) {
      // not a run directory we can serve
    }
  }

  void scan_runs() {
    std::lock_guard lock(runs_mu);
    for (const auto& d : opt.run_dirs) add_run_dir(d);
    if (!opt.runs_root.empty() && fs::is_directory(opt.runs_root))
      for (const auto& entry : fs::directory_iterator(opt.runs_root))
        if (entry.is_directory()) add_run_dir(entry.path());
  }

  std::shared_ptr<RunEntry> find_run(const std::string& id) {
    {
      std::lock_guard lock(runs_mu);
      if (auto it = runs.find(id); it != runs.end()) return it->second;
    }
    scan_runs();
    std::lock_guard lock(runs_mu);
    if (auto it = runs.find(id); it != runs.end()) return it->second;
    throw HttpError(404, "unknown run '" + id + "'");
  }

  std::shared_ptr<LiveSession> find_session(const std::string& id) {
    std::lock_guard lock(sessions_mu);
    if (auto it = sessions.find(id); it != sessions.end()) return it->second;
    throw HttpError(404, "unknown session '" + id + "'");
  }

  template <class F>
  httplib::Server::Handler guard(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const HttpError& e) {
        send_json(res, {{"error", e.what()}}, e.status);
      } catch (const ValidationError& e) {
        send_json(res, {{"error", e.what()}, {"issues", e.issues()}}, 400);
      } catch (const ParseError& e) {
        send_json(res, {{"error", e.what()}}, 400);
      } catch (const json::exception& e) {
        send_json(res, {{"error", e.what()}}, 400);
      } catch (const std::exception& e) {
        send_json(res, {{"error", e.what()}}, 500);
      }
    };
  }

  json run_summary(RunEntry& e) {
    json j = {{"run_id", e.id}, {"mode", e.runner ? "operator" : "stored"}};
    if (e.runner) {
      const auto& eng = e.runner->engine();
      j["sessions_completed"] = eng.run().completed();
      j["sessions_total"] = eng.config().sessions;
      j["pending_session"] = eng.pending() ? json(eng.pending()->session_index) : json();
      j["tree_version"] = eng.run().tree().version;
      j["memory_snapshot_id"] = eng.run().memory().digest();
      j["status"] = eng.done() ? "complete" : "awaiting_selection";
    } else {
      const json log = files::read_json(e.dir / "run_log.json");
      const json cp = fs::exists(e.dir / "checkpoint.json") ? files::read_json(e.dir / "checkpoint.json") : json();
      j["sessions_completed"] = log.at("sessions").size();
      j["sessions_total"] = nullptr;
      j["pending_session"] = nullptr;
      j["tree_version"] = cp.is_null() ? json() : cp.at("tree_version");
      j["memory_snapshot_id"] = cp.is_null() ? json() : cp.at("memory_snapshot_id");
      j["status"] = log.at("aborted").is_null() ? "stored" : "aborted";
    }
    return j;
  }

  void routes() {
    svr.Post("/sessions", guard([this](const httplib::Request& req, httplib::Response& res) {
      if (!opt.live || !counselor) throw HttpError(503, "live sessions are not configured");
      const json body = parse_body(req);
      auto s = std::make_shared<LiveSession>();
      client::ClientProfileCard card = *live_card;
      if (body.contains("card_id")) {
        RunConfig cfg = *opt.live;
        cfg.card_id = body.at("card_id").get<std::string>();
        try {
          card = select_card(cfg);
        } catch (const ValidationError& e) {
          throw HttpError(404, e.what());
        }
      }
      {
        std::lock_guard lock(sessions_mu);
        char buf[32];
        std::snprintf(buf, sizeof buf, "s%04d", next_session++);
        s->id = buf;
      }
      s->card_id = card.card_id;
      s->root = client::root_id_for(card.therapy_school);
      gateway::CallContext call;
      call.labels = {{"scope", "live/" + s->id}, {"session", s->id}};
      s->plan = memory::reason_plan(*counselor, memory::MemoryState{}, 1, {live_max_objectives, live_plan_task}, call);
      {
        std::lock_guard lock(sessions_mu);
        sessions[s->id] = s;
      }
      std::lock_guard lock(s->mu);
      send_json(res, session_json(*s), 201);
    }));

    svr.Post(R"(/sessions/([^/]+)/turns)", guard([this](const httplib::Request& req, httplib::Response& res) {
      auto s = find_session(req.matches[1]);
      const json body = parse_body(req);
      if (!body.contains("text") || !body["text"].is_string() || body["text"].get<std::string>().empty())
        throw HttpError(400, "field 'text' must be a non-empty string");
      const std::string text = body["text"].get<std::string>();
      const bool end = body.value("end_signal", false);

      std::lock_guard lock(s->mu);
      if (s->ended) throw HttpError(409, "session " + s->id + " has ended");
      const int turn_no = static_cast<int>(s->turns.size() / 2) + 1;
      gateway::CallContext call;
      call.labels = {{"scope", "live/" + s->id}, {"session", s->id}, {"turn", std::to_string(turn_no)}};
      const memory::MemoryState memory{};
      skills::DialogueState state{text, memory, s->plan, s->root};
      const auto skill = skills::retrieve_skill(*counselor, *live_tree, state, call, live_retrieval_task);
      const auto ctx = memory::assemble_context(text, memory, s->plan, skill, s->turns);
      auto reply = memory::generate_turn(*counselor, ctx, skill, call, live_generation_task);
      s->turns.emplace_back(memory::ClientTurn{text, end, {}});
      s->turns.emplace_back(reply);
      s->ended = end;
      send_json(res, {{"session_id", s->id},
                      {"turn_id", turn_no},
                      {"response", reply.response},
                      {"reasoning", reply.reasoning},
                      {"skill", {{"id", reply.skill_ref}, {"name", reply.skill_name}}},
                      {"plan", plan_json(s->plan)},
                      {"status", s->ended ? "ended" : "active"}});
    }));

    svr.Get(R"(/sessions/([^/]+))", guard([this](const httplib::Request& req, httplib::Response& res) {
      auto s = find_session(req.matches[1]);
      std::lock_guard lock(s->mu);
      send_json(res, session_json(*s));
    }));

    svr.Post("/runs", guard([this](const httplib::Request& req, httplib::Response& res) {
      if (opt.runs_root.empty()) throw HttpError(503, "no runs root configured");
      const json body = parse_body(req);
      RunConfig cfg;
      if (body.contains("config_path")) {
        cfg = load_config(body["config_path"].get<std::string>());
      } else if (body.contains("config")) {
        cfg = RunConfig::from_json(body["config"], body.value("base_dir", std::string()));
      } else {
        throw HttpError(400, "expected 'config' or 'config_path'");
      }
      if (body.contains("scripted_dir")) apply_scripted_dir(cfg, body["scripted_dir"].get<std::string>());
      if (auto issues = cfg.validate(); !issues.empty()) throw ValidationError(std::move(issues));
      const std::string id = cfg.effective_run_id();
      {
        std::lock_guard lock(runs_mu);
        if (runs.contains(id)) throw HttpError(409, "run '" + id + "' already exists");
      }
      auto e = std::make_shared<RunEntry>();
      e->id = id;
      e->dir = opt.runs_root / id;
      e->runner = Runner::create(cfg, e->dir);
      if (!e->runner->engine().done()) e->runner->prepare();
      else e->runner->finish();
      {
        std::lock_guard lock(runs_mu);
        runs[id] = e;
      }
      std::lock_guard lock(e->mu);
      send_json(res, run_summary(*e), 201);
    }));

    svr.Get("/runs", guard([this](const httplib::Request&, httplib::Response& res) {
      scan_runs();
      std::vector<std::shared_ptr<RunEntry>> all;
      {
        std::lock_guard lock(runs_mu);
        for (auto& [_, e] : runs) all.push_back(e);
      }
      json list = json::array();
      for (auto& e : all) {
        std::lock_guard lock(e->mu);
        list.push_back(run_summary(*e));
      }
      send_json(res, {{"runs", std::move(list)}});
    }));

    svr.Get(R"(/runs/([^/]+))", guard([this](const httplib::Request& req, httplib::Response& res) {
      auto e = find_run(req.matches[1]);
      std::lock_guard lock(e->mu);
      send_json(res, run_summary(*e));
    }));

    svr.Get(R"(/runs/([^/]+)/tree/([^/]+))", guard([this](const httplib::Request& req, httplib::Response& res) {
      auto e = find_run(req.matches[1]);
      const int v = parse_int(req.matches[2], "tree version");
      const RunStore store(e->dir);
      const auto p = store.tree_path(v);
      if (!fs::exists(p)) throw HttpError(404, "no tree version " + std::to_string(v));
      res.status = 200;
      res.set_content(files::read_text(p), "application/json");
    }));

    svr.Get(R"(/runs/([^/]+)/memory/([^/]+))", guard([this](const httplib::Request& req, httplib::Response& res) {
      auto e = find_run(req.matches[1]);
      const std::string digest = req.matches[2];
      if (digest.find_first_not_of("0123456789abcdef") != std::string::npos)
        throw HttpError(404, "invalid memory digest");
      const auto p = RunStore(e->dir).memory_path(digest);
      if (!fs::exists(p)) throw HttpError(404, "unknown memory snapshot " + digest);
      res.status = 200;
      res.set_content(files::read_text(p), "application/json");
    }));

    svr.Get(R"(/runs/([^/]+)/candidates/([^/]+))", guard([this](const httplib::Request& req, httplib::Response& res) {
      auto e = find_run(req.matches[1]);
      const int t = parse_int(req.matches[2], "session index");
      std::lock_guard lock(e->mu);
      json out = {{"run_id", e->id}, {"session_index", t}};
      std::vector<rollout::SessionCandidate> cands;
      if (e->runner && e->runner->engine().pending() && e->runner->engine().pending()->session_index == t) {
        const auto& p = *e->runner->engine().pending();
        cands = p.candidates;
        out["status"] = "pending";
        out["argmax_index"] = p.argmax ? json(*p.argmax) : json();
        out["tie"] = p.tie;
        out["winner_index"] = nullptr;
        out["selector"] = nullptr;
      } else {
        const json log = files::read_json(e->dir / "run_log.json");
        const auto& sessions = log.at("sessions");
        if (t < 1 || t > static_cast<int>(sessions.size())) throw HttpError(404, "no session step " + std::to_string(t));
        const auto& rec = sessions[static_cast<std::size_t>(t - 1)];
        cands = RunStore(e->dir).read_candidates(t);
        out["status"] = "committed";
        out["argmax_index"] = rec.at("argmax_index");
        out["tie"] = rec.at("tie");
        out["winner_index"] = rec.at("winner_index");
        out["selector"] = rec.at("selector");
      }
      json list = json::array();
      for (const auto& c : cands) list.push_back(candidate_json(c));
      out["candidates"] = std::move(list);
      send_json(res, out);
    }));

    svr.Post(R"(/runs/([^/]+)/select/([^/]+))", guard([this](const httplib::Request& req, httplib::Response& res) {
      auto e = find_run(req.matches[1]);
      const int t = parse_int(req.matches[2], "session index");
      const json body = parse_body(req);
      std::lock_guard lock(e->mu);
      int completed = 0;
      if (e->runner) completed = e->runner->engine().run().completed();
      else completed = static_cast<int>(files::read_json(e->dir / "run_log.json").at("sessions").size());
      if (t >= 1 && t <= completed) throw HttpError(409, "session step " + std::to_string(t) + " has already been advanced");
      if (!e->runner || !e->runner->engine().pending() || e->runner->engine().pending()->session_index != t)
        throw HttpError(404, "no pending session step " + std::to_string(t));
      if (!body.contains("candidate_index") || !body["candidate_index"].is_number_unsigned())
        throw HttpError(400, "field 'candidate_index' must be a non-negative integer");
      const auto k = body["candidate_index"].get<std::size_t>();
      if (k >= e->runner->engine().pending()->candidates.size())
        throw HttpError(400, "candidate_index out of range");
      if (e->runner->engine().pending()->candidates[k].failed)
        throw HttpError(400, "candidate " + std::to_string(k) + " failed and cannot be selected");
      const auto rec = e->runner->commit(k);
      if (e->runner->engine().done()) e->runner->finish();
      else e->runner->prepare();
      send_json(res, {{"run_id", e->id},
                      {"session_index", rec.session_index},
                      {"winner_index", rec.winner_index},
                      {"session_id", rec.session_id},
                      {"selector", rollout::to_string(rec.selector)},
                      {"argmax_index", rec.argmax_index ? json(*rec.argmax_index) : json()},
                      {"memory_after_id", rec.memory_after_id},
                      {"tree_version_after", rec.tree_version_after}});
    }));
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() { stop(); }

int Service::start() {
  if (impl_->thread.joinable()) return impl_->port;
  if (impl_->opt.port == 0) {
    impl_->port = impl_->svr.bind_to_any_port(impl_->opt.host);
  } else {
    impl_->port = impl_->svr.bind_to_port(impl_->opt.host, impl_->opt.port) ? impl_->opt.port : -1;
  }
  if (impl_->port <= 0) throw Error("cannot bind " + impl_->opt.host + ":" + std::to_string(impl_->opt.port));
  impl_->thread = std::thread([this] { impl_->svr.listen_after_bind(); });
  impl_->svr.wait_until_ready();
  return impl_->port;
}

void Service::stop() {
  if (!impl_) return;
  impl_->svr.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void Service::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

int Service::port() const { return impl_->port; }

}  // namespace evocounsel::run
