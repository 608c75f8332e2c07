// include/svtk/cli.h

// Copyright 2026  The svtk Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SVTK_CLI_H_
#define SVTK_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace svtk {

/// Runs one subcommand.  `args` excludes the program name.  Returns 0 on
/// success, 1 on a domain error (message on `err`), 2 on a usage error.
int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err);

}  // namespace svtk

#endif  // SVTK_CLI_H_
