// filled in after the core builds
