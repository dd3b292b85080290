# Keeps this directory on sys.path so the shared helper modules
# (envstubs, toygen) are importable from every test file.
