# Study orchestration package
