#!/usr/bin/env python3
"""Writes crates/core/data/nb_corpus.tsv: labeled Chinese commentary sentences
(label<TAB>sentence, 240 per class) for the naive-Bayes sentiment score."""

import itertools
import pathlib

SUBJECTS = ["这一手", "他这次出牌", "南家", "北家", "东家", "西家", "这把", "对家的配合",
            "这个炸弹", "这次接风", "最后一轮", "整场比赛"]
POSITIVE = ["打得非常精彩", "真是漂亮", "处理得很高明", "太厉害了", "完美地压住了对手",
            "让观众很开心", "配合得十分出色", "节奏掌握得很好", "算牌精准令人佩服", "稳稳拿下了这一局",
            "成功化解了危机", "展现了强大的实力", "思路清晰值得称赞", "获得了满堂喝彩", "打出了自信",
            "赢得很漂亮", "时机选得恰到好处", "让人眼前一亮", "堪称教科书级别", "轻松取得胜利"]
NEGATIVE = ["出现了明显失误", "打得很糟糕", "实在太可惜了", "让人非常失望", "完全陷入被动",
            "错过了最好的机会", "白白浪费了炸弹", "判断出现错误", "让队友很难受", "最终遗憾落败",
            "节奏彻底崩溃", "拆牌拆得太乱", "送给对手机会", "处境十分危险", "打得犹豫不决",
            "再次输掉了这一局", "让观众直呼可惜", "没有看清局势", "配合得一塌糊涂", "暴露了太多破绽"]


def main() -> None:
    out = pathlib.Path(__file__).resolve().parent.parent / "crates/core/data/nb_corpus.tsv"
    lines = ["# label\tsentence"]
    for label, preds in (("pos", POSITIVE), ("neg", NEGATIVE)):
        for subj, pred in itertools.product(SUBJECTS, preds):
            lines.append(f"{label}\t{subj}{pred}。")
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
