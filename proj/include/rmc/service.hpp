#pragma once

/** \file service.hpp
 *  \brief Read-only HTTP front end.
 *
 *   GET  /v1/health     -> {"status":"ok"}
 *   POST /v1/recommend  -> RecommendResponse for a RecommendRequest body
 *
 * Errors are {"error": message}: 400 for bad requests, 500 otherwise.
 */

#include <string>

// bursts of clients overflow httplib's default backlog of 5
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#endif
#include <httplib.h>
#include <json.hpp>

#include "rmc/error.hpp"
#include "rmc/recommend.hpp"

namespace rmc {

inline int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedRecord:
        case ErrorCode::BadK:
        case ErrorCode::InvalidArgument:
        case ErrorCode::MissingVector:
            return 400;
        default:
            return 500;
    }
}

inline void install_routes(httplib::Server& server, const Recommender& recommender) {
    constexpr const char* kJson = "application/json";
    const auto send_error = [kJson](httplib::Response& res, int status, const std::string& message) {
        nlohmann::json body;
        body["error"] = message;
        res.status = status;
        res.set_content(body.dump(), kJson);
    };

    server.Get("/v1/health", [kJson](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"status":"ok"})", kJson);
    });

    server.Post("/v1/recommend", [&recommender, send_error, kJson](const httplib::Request& req, httplib::Response& res) {
        try {
            const auto response = recommender.recommend(parse_request(req.body));
            res.set_content(to_json(response).dump(), kJson);
        } catch (const Error& e) {
            send_error(res, http_status(e.code()), e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    });
}

}  // namespace rmc
