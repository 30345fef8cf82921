# Infrastructure layer: scenario files and reports
