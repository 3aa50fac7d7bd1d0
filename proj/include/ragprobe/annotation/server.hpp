#pragma once

#include <memory>
#include <string>

#include "ragprobe/annotation/store.hpp"

namespace ragprobe::annotation {

/// REST front end of an AnnotationStore. Every request needs
/// "Authorization: Bearer <token>" of a registered annotator.
///
///   GET  /api/tasks/next?stage=S[&annotator=A]   200 task, 204 when none is eligible
///   POST /api/tasks/{id}/labels                  body {"labels": [...]}; 200 receipt
///   GET  /api/tasks/{id}                         200 task
///   GET  /api/export[?stage=S]                   200 label records, one per line
///   GET  /api/progress                           200 counts per stage and status
///   GET  /api/agreement?stage=S                  200 live alpha over completed pairs
///
/// Errors come back as {"error": message} with 400 (malformed request),
/// 401, 403, 404, 409 (resubmission, expired claim) or 422 (labels that do
/// not match the task).
class AnnotationServer {
public:
    explicit AnnotationServer(AnnotationStore& store);
    ~AnnotationServer();
    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    /// Binds an ephemeral port and returns it.
    int bind_any_port(const std::string& host = "127.0.0.1");
    /// Binds `port`; throws IoError when that fails.
    void bind(const std::string& host, int port);
    /// Serves until stop(); call after a bind.
    void serve();
    void stop();
    /// Blocks until the server accepts connections.
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace ragprobe::annotation
