// viewclean-server: exposes api::Service over HTTP.

#include <iostream>

#include "CLI11.hpp"
#include "httplib.h"
#include "viewclean/api.hpp"

int main(int argc, char** argv) {
    CLI::App app{"viewclean-server: HTTP front end for viewclean sessions"};
    std::string host = "127.0.0.1";
    int port = 8080;
    app.add_option("--host", host);
    app.add_option("--port", port)->check(CLI::Range(1, 65535));
    CLI11_PARSE(app, argc, argv);

    viewclean::api::Service service;
    httplib::Server server;

    auto dispatch = [&](const httplib::Request& req, httplib::Response& res) {
        // Rebuild the raw target so the service does its own query decoding.
        std::string target = req.path;
        char sep = '?';
        for (const auto& [k, v] : req.params) {
            target += sep;
            target += httplib::detail::encode_query_param(k) + "=" + httplib::detail::encode_query_param(v);
            sep = '&';
        }
        auto out = service.handle(viewclean::api::Request::make(
            req.method, target, req.body, req.get_header_value("Content-Type")));
        res.status = out.status;
        res.set_content(out.body, out.content_type);
    };
    server.Get(".*", dispatch);
    server.Post(".*", dispatch);
    server.Delete(".*", dispatch);

    std::cerr << "listening on http://" << host << ":" << port << "\n";
    if (!server.listen(host, port)) {
        std::cerr << "cannot bind " << host << ":" << port << "\n";
        return 1;
    }
    return 0;
}
