class Review:
    def __init__(self, reviewer, text):
        self.reviewer = reviewer
        self.text = text
