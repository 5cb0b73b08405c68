"""Files on disk: configs, checkpoints, state documents and CSV tables."""
