"""Two-party protocols run through the session harness."""
