"""Session runner, transcripts, batch statistics and the command line."""
