#pragma once

namespace pllab::cli {
int run(int argc, char** argv);
}
