# CurveKit 源码包
