#include "gwr/config.hpp"
