// Copyright 2026 The form57 Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "form57/service.hpp"

#include <httplib.h>

#include <condition_variable>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <utility>

#include "form57/report_table.hpp"

namespace form57 {
namespace {

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}
  int status() const noexcept { return status_; }
  const std::string& code() const noexcept { return code_; }

 private:
  int status_;
  std::string code_;
};

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, Json{{"code", code}, {"message", message}}, status);
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const HttpError& e) {
    send_error(res, e.status(), e.code(), e.what());
  } catch (const GatewayError& e) {
    send_error(res, 502, "gateway_error", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal_error", e.what());
  }
}

Json answer_json(const FieldAnswer& a) {
  PopulatedForm tmp;
  tmp.answers.push_back(a);
  return form_to_json(tmp)["answers"][a.key.str()];
}

Json linkage_view(const std::optional<LinkageReport>& linkage, const std::string& id) {
  if (!linkage) return Json{{"status", "not_linked"}};
  if (const LinkedPair* p = linkage->find_pair(id)) {
    return Json{{"status", "matched"}, {"record_id", p->record_id}, {"day_offset", p->day_offset},
                {"soft_score", p->soft_score}};
  }
  for (const auto& a : linkage->ambiguous) {
    if (a.article_id == id) return Json{{"status", "ambiguous"}, {"record_ids", a.record_ids}};
  }
  return Json{{"status", "unmatched"}};
}

const FraRecord* linked_record(const StateStore& store, const std::optional<LinkageReport>& linkage,
                               const std::string& id) {
  if (!linkage) return nullptr;
  const LinkedPair* p = linkage->find_pair(id);
  if (p == nullptr) return nullptr;
  auto it = store.records().find(p->record_id);
  return it == store.records().end() ? nullptr : &it->second;
}

EvalReport report_for(const StateStore& store, const std::optional<LinkageReport>& linkage, const PopulatedForm& form,
                      TextJudge& judge, const EvalOptions& options) {
  static const Crosswalk kEmpty = Crosswalk::from_json(Json{{"fields", Json::object()}});
  const auto annotation = store.annotation(form.article_id);
  return compute_report(form, linked_record(store, linkage, form.article_id),
                        annotation.value_or(AnswerabilityAnnotation{form.article_id, {}}), store.schema(),
                        store.crosswalk() ? *store.crosswalk() : kEmpty, judge, options);
}

}  // namespace

Json incident_view(const StateStore& store, const std::string& id, TextJudge& judge, const EvalOptions& options) {
  if (!store.has_article(id)) throw HttpError(404, "incident_not_found", "no incident \"" + id + "\"");
  const ArticleDoc article = store.article(id);
  const auto linkage = store.linkage();
  const auto form = store.form(id);
  const auto annotation = store.annotation(id);

  Json view{{"article_id", id},
            {"source_name", article.source_name},
            {"published_at", article_meta_to_json(article)["published_at"]},
            {"linkage", linkage_view(linkage, id)},
            {"annotation", annotation ? annotation_to_json(*annotation) : Json::array()}};
  if (!form) {
    view["form"] = nullptr;
    view["verdicts"] = Json::object();
    view["unknown_count"] = 0;
    return view;
  }
  view["form"] = form_to_json(*form);
  std::size_t unknown = 0;
  for (const auto& a : form->answers) unknown += a.is_unknown() ? 1 : 0;
  view["unknown_count"] = unknown;
  Json verdicts = Json::object();
  if (linked_record(store, linkage, id) != nullptr) {
    for (const auto& v : report_for(store, linkage, *form, judge, options).verdicts) {
      verdicts[v.key.str()] = Json{{"verdict", std::string(to_string(v.verdict))},
                                   {"rule", std::string(to_string(v.rule))},
                                   {"gold", v.gold}};
    }
  }
  view["verdicts"] = std::move(verdicts);
  return view;
}

EvalReport store_report(const StateStore& store, TextJudge& judge, const EvalOptions& options) {
  const auto linkage = store.linkage();
  std::vector<EvalReport> reports;
  for (const auto& id : store.article_ids()) {
    if (auto form = store.form(id)) reports.push_back(report_for(store, linkage, *form, judge, options));
  }
  if (reports.empty()) return summarize_verdicts({});
  return aggregate_reports(reports);
}

struct ReviewService::Impl {
  StateStore& store;
  ModelGateway& gateway;
  TextJudge& judge;
  ServiceOptions options;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  std::mutex locks_mu;
  std::map<std::string, std::unique_ptr<std::mutex>> incident_locks;
  std::set<std::pair<std::string, std::string>> in_flight;

  Impl(StateStore& s, ModelGateway& g, TextJudge& j, ServiceOptions o)
      : store(s), gateway(g), judge(j), options(std::move(o)) {}

  std::mutex& lock_for(const std::string& id) {
    std::lock_guard lk(locks_mu);
    auto& m = incident_locks[id];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
  }

  void require_incident(const std::string& id) {
    if (!store.has_article(id)) throw HttpError(404, "incident_not_found", "no incident \"" + id + "\"");
  }

  Json rerun(const std::string& id, const std::string& group) {
    require_incident(id);
    if (store.grouping().find(group) == nullptr) {
      throw HttpError(404, "group_not_found", "no group \"" + group + "\" in the grouping");
    }
    {
      std::lock_guard lk(locks_mu);
      if (!in_flight.emplace(id, group).second) {
        throw HttpError(409, "rerun_in_flight", "a rerun of \"" + group + "\" is already running for " + id);
      }
    }
    struct Release {
      Impl* self;
      std::pair<std::string, std::string> key;
      ~Release() {
        std::lock_guard lk(self->locks_mu);
        self->in_flight.erase(key);
      }
    } release{this, {id, group}};

    if (!store.form(id)) throw HttpError(404, "form_not_found", "incident " + id + " has no extracted form yet");
    const ArticleDoc article = store.article(id);
    const std::vector<FieldAnswer> answers =
        populate_group(store.schema(), store.grouping(), group, article, gateway, options.qa);

    std::lock_guard write(lock_for(id));
    PopulatedForm form = *store.form(id);
    form.replace(answers);
    store.save_form(form);
    Json out = Json::object();
    for (const auto& a : answers) out[a.key.str()] = answer_json(a);
    return Json{{"article_id", id}, {"group", group}, {"answers", std::move(out)}};
  }

  Json put_annotation(const std::string& id, const std::string& body) {
    require_incident(id);
    Json doc;
    try {
      doc = parse_json(body);
    } catch (const JsonParseError& e) {
      throw HttpError(400, "bad_json", e.what());
    }
    AnswerabilityAnnotation ann;
    try {
      ann = annotation_from_json(id, doc, store.schema());
    } catch (const SchemaFormatError& e) {
      throw HttpError(400, "bad_annotation", e.what());
    }
    std::lock_guard write(lock_for(id));
    store.save_annotation(ann);
    return Json{{"article_id", id}, {"answerable", annotation_to_json(ann)}};
  }

  Json report() {
    const EvalReport r = store_report(store, judge, options.eval);
    Json doc = report_to_json(r);
    const QaTableRow row{"Stored forms", "", "", summarize_runs(std::span<const EvalReport>(&r, 1))};
    doc["table"] = render_qa_table(std::span<const QaTableRow>(&row, 1));
    return doc;
  }

  void routes() {
    server.Get("/api/v1/incidents", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        Json list = Json::array();
        for (const auto& id : store.article_ids()) list.push_back(incident_view(store, id, judge, options.eval));
        send_json(res, list);
      });
    });
    server.Get(R"(/api/v1/incidents/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, incident_view(store, req.matches[1], judge, options.eval)); });
    });
    server.Post(R"(/api/v1/incidents/([^/]+)/groups/([^/]+)/rerun)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] { send_json(res, rerun(req.matches[1], req.matches[2])); });
                });
    server.Put(R"(/api/v1/incidents/([^/]+)/annotations)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, put_annotation(req.matches[1], req.body)); });
    });
    server.Get("/api/v1/schema", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        send_json(res, Json{{"schema", serialize_schema(store.schema(), SchemaVariant::HumanCentric)},
                            {"grouping", serialize_grouping(store.grouping())}});
      });
    });
    server.Get("/api/v1/report", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, report()); });
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send_error(res, res.status, "not_found", "no such route");
    });
  }
};

ReviewService::ReviewService(StateStore& store, ModelGateway& gateway, TextJudge& judge, ServiceOptions options)
    : impl_(std::make_unique<Impl>(store, gateway, judge, std::move(options))) {
  impl_->routes();
}

ReviewService::~ReviewService() { stop(); }

int ReviewService::start() {
  if (impl_->thread.joinable()) return impl_->port;
  impl_->port = impl_->options.port == 0 ? impl_->server.bind_to_any_port(impl_->options.host)
                                         : (impl_->server.bind_to_port(impl_->options.host, impl_->options.port)
                                                ? impl_->options.port
                                                : -1);
  if (impl_->port <= 0) {
    throw std::runtime_error("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void ReviewService::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void ReviewService::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace form57
