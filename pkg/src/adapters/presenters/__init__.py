# Presenters package
# The JSON presenter shapes results and errors for the terminal and picks the
# exit code; the artefact writer turns result rows into CSV and JSON files.
