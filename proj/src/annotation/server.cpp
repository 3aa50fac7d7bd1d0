#include "ragprobe/annotation/server.hpp"

#include <httplib.h>

#include "ragprobe/common/error.hpp"

namespace ragprobe::annotation {
namespace {

struct HttpError {
    int status;
    std::string message;
};

int status_for(const std::exception& e)
{
    if (dynamic_cast<const InvalidArgument*>(&e)) return 422;
    if (dynamic_cast<const SchemaError*>(&e)) return 422;
    if (dynamic_cast<const ConflictError*>(&e)) return 409;
    if (dynamic_cast<const NotFound*>(&e)) return 404;
    if (dynamic_cast<const PermissionError*>(&e)) return 403;
    return 500;
}

void send_json(httplib::Response& res, int status, const Json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

Stage stage_param(const httplib::Request& req, bool required)
{
    if (!req.has_param("stage")) {
        if (required) throw HttpError{400, "missing query parameter 'stage'"};
        return Stage::relevance;
    }
    try {
        return metrics::parse_stage(req.get_param_value("stage"));
    } catch (const Error& e) {
        throw HttpError{400, e.what()};
    }
}

} // namespace

struct AnnotationServer::Impl {
    AnnotationStore& store;
    httplib::Server server;

    explicit Impl(AnnotationStore& s) : store(s) { routes(); }

    AnnotatorProfile authenticate(const httplib::Request& req) const
    {
        const std::string header = req.get_header_value("Authorization");
        constexpr std::string_view prefix = "Bearer ";
        if (header.size() <= prefix.size() || header.compare(0, prefix.size(), prefix) != 0)
            throw HttpError{401, "missing bearer token"};
        auto profile = store.authenticate(header.substr(prefix.size()));
        if (!profile) throw HttpError{401, "unknown token"};
        return *profile;
    }

    template <class Fn>
    httplib::Server::Handler guarded(Fn fn)
    {
        return [this, fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(authenticate(req), req, res);
            } catch (const HttpError& e) {
                send_json(res, e.status, Json{{"error", e.message}});
            } catch (const Json::exception& e) {
                send_json(res, 400, Json{{"error", std::string("malformed request body: ") + e.what()}});
            } catch (const std::exception& e) {
                send_json(res, status_for(e), Json{{"error", e.what()}});
            }
        };
    }

    void routes()
    {
        server.Get("/api/tasks/next", guarded([this](const AnnotatorProfile& who, const httplib::Request& req,
                                                     httplib::Response& res) {
                       const Stage stage = stage_param(req, true);
                       if (req.has_param("annotator") && req.get_param_value("annotator") != who.annotator_id)
                           throw HttpError{403, "token does not belong to annotator '" +
                                                    req.get_param_value("annotator") + "'"};
                       auto task = store.claim_next(who.annotator_id, stage);
                       if (!task) {
                           res.status = 204;
                           return;
                       }
                       send_json(res, 200, to_json(*task));
                   }));
        server.Post(R"(/api/tasks/([^/]+)/labels)",
                    guarded([this](const AnnotatorProfile& who, const httplib::Request& req, httplib::Response& res) {
                        const Json body = Json::parse(req.body);
                        const Json& labels = body.is_object() ? body.at("labels") : body;
                        const auto receipt = store.submit_labels(req.matches[1], who.annotator_id, labels);
                        send_json(res, 200, to_json(receipt));
                    }));
        server.Get(R"(/api/tasks/([^/]+))",
                   guarded([this](const AnnotatorProfile&, const httplib::Request& req, httplib::Response& res) {
                       send_json(res, 200, to_json(store.task(req.matches[1])));
                   }));
        server.Get("/api/export",
                   guarded([this](const AnnotatorProfile&, const httplib::Request& req, httplib::Response& res) {
                       std::optional<Stage> stage;
                       if (req.has_param("stage")) stage = stage_param(req, true);
                       res.status = 200;
                       res.set_content(store.export_labels(stage), "application/x-ndjson");
                   }));
        server.Get("/api/progress",
                   guarded([this](const AnnotatorProfile&, const httplib::Request&, httplib::Response& res) {
                       send_json(res, 200, store.progress());
                   }));
        server.Get("/api/agreement",
                   guarded([this](const AnnotatorProfile&, const httplib::Request& req, httplib::Response& res) {
                       const Stage stage = stage_param(req, true);
                       const bool merge = req.get_param_value("merge_partial") != "false";
                       const auto a = store.agreement(stage, merge);
                       Json j{{"stage", metrics::to_string(stage)},
                              {"items_used", a.items_used},
                              {"pairable_values", a.pairable_values},
                              {"zero_expected_disagreement", a.zero_expected_disagreement},
                              {"note", a.note}};
                       j["alpha"] = a.alpha ? Json(*a.alpha) : Json(nullptr);
                       send_json(res, 200, j);
                   }));
    }
};

AnnotationServer::AnnotationServer(AnnotationStore& store) : impl_(std::make_unique<Impl>(store)) {}

AnnotationServer::~AnnotationServer()
{
    if (impl_) impl_->server.stop();
}

int AnnotationServer::bind_any_port(const std::string& host)
{
    const int port = impl_->server.bind_to_any_port(host);
    if (port < 0) throw IoError("cannot bind annotation server on " + host);
    return port;
}

void AnnotationServer::bind(const std::string& host, int port)
{
    if (!impl_->server.bind_to_port(host, port))
        throw IoError("cannot bind annotation server on " + host + ":" + std::to_string(port));
}

void AnnotationServer::serve() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() { impl_->server.stop(); }

void AnnotationServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

} // namespace ragprobe::annotation
