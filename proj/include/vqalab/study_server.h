// Copyright 2026 The vqalab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// HTTP+JSON front end of the study service.

#ifndef VQALAB_STUDY_SERVER_H_
#define VQALAB_STUDY_SERVER_H_

#include <filesystem>
#include <functional>
#include <set>
#include <string>

#include "vqalab/error.h"
#include "vqalab/study.h"

namespace httplib {
class Server;
}

namespace vqalab::study {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Routes requests to a StudyStore. Mutating requests are idempotent under
// a client-supplied request id (Idempotency-Key header or "request_id"
// body field).
class StudyApi {
 public:
  StudyApi(StudyStore& store, std::function<Timestamp()> clock,
           std::filesystem::path media_dir = {}, std::string media_ext = ".y4m");

  HttpResponse Handle(const std::string& method, const std::string& path,
                      const std::string& body, const std::string& request_id = {});

  // Registers all routes on an httplib server.
  void Mount(httplib::Server& server);

 private:
  HttpResponse Stream(const std::string& video_id);

  StudyStore& store_;
  std::function<Timestamp()> clock_;
  std::filesystem::path media_dir_;
  std::string media_ext_;
  std::set<std::string> videos_;
};

int HttpStatus(ErrorCode code);

}  // namespace vqalab::study

#endif  // VQALAB_STUDY_SERVER_H_
