# Raster, RNG and worker-pool helpers
