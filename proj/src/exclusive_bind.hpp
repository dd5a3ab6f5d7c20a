/*
 * Copyright 2026 The Switchboard Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SWITCHBOARD_SRC_EXCLUSIVE_BIND_HPP_
#define SWITCHBOARD_SRC_EXCLUSIVE_BIND_HPP_

#include <sys/socket.h>

#include <httplib.h>

namespace switchboard::detail {

// httplib defaults to SO_REUSEPORT, which lets a second server bind a port
// that is already serving. Keep SO_REUSEADDR only so binding a busy port fails.
inline void use_exclusive_bind(httplib::Server& server) {
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
}

}  // namespace switchboard::detail

#endif  // SWITCHBOARD_SRC_EXCLUSIVE_BIND_HPP_
